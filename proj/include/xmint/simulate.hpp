#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "xmint/coefficients.hpp"
#include "xmint/dataset.hpp"
#include "xmint/error.hpp"
#include "xmint/path.hpp"
#include "xmint/rng.hpp"

namespace xmint {

/// Ground truth for the synthetic design: which mediators carry signal,
/// which of them also carry an exposure interaction, and the shared
/// effect size placed on every nonzero a, b1, b2. Indices are 0-based.
struct SimTruth {
    std::vector<int> true_mediators{0, 1, 2};
    std::vector<int> true_interactions{0};
    double effect_size = 1.0;
    double direct_effect = 1.0;
};

inline void validate(const SimTruth& truth, int V) {
    if (!(truth.effect_size > 0.0)) throw InvalidTruth("effect_size must be positive");
    for (int v : truth.true_mediators)
        if (v < 0 || v >= V)
            throw InvalidTruth("true mediator index " + std::to_string(v) +
                               " out of range for V=" + std::to_string(V));
    for (int v : truth.true_interactions)
        if (v < 0 || v >= V)
            throw InvalidTruth("true interaction index " + std::to_string(v) +
                               " out of range for V=" + std::to_string(V));
}

struct SimMetrics {
    double tpr_med = 0.0;
    double fdr_med = 0.0;
    double tpr_int = 0.0;
    double fdr_int = 0.0;
};

/// Synthetic dataset: X_i ~ N(0,1); M_iv = a_v X_i + e1_iv; Y_i = c X_i +
/// sum_v b1_v M_iv + sum_v b2_v X_i M_iv + e2_i, all noise standard
/// normal. Draw order from one generator is fixed: the N exposure values,
/// then the mediator errors column by column, then the N outcome errors.
inline Dataset generate_dataset(int N, int V, const SimTruth& truth, std::uint64_t seed) {
    if (N < 3) throw InvalidData("generate_dataset: need N >= 3");
    if (V < 1) throw InvalidData("generate_dataset: need V >= 1");
    validate(truth, V);

    Eigen::VectorXd a = Eigen::VectorXd::Zero(V);
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(V);
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(V);
    for (int v : truth.true_mediators) {
        a[v] = truth.effect_size;
        b1[v] = truth.effect_size;
    }
    for (int v : truth.true_interactions) b2[v] = truth.effect_size;

    NormalSampler rng(seed);
    Dataset d;
    d.X.resize(N);
    for (int i = 0; i < N; ++i) d.X[i] = rng.normal();

    d.M.resize(N, V);
    for (int v = 0; v < V; ++v)
        for (int i = 0; i < N; ++i) d.M(i, v) = a[v] * d.X[i] + rng.normal();

    d.Y = truth.direct_effect * d.X + d.M * b1 +
          Eigen::VectorXd((d.M.array().colwise() * d.X.array()).matrix() * b2);
    for (int i = 0; i < N; ++i) d.Y[i] += rng.normal();
    return d;
}

namespace detail {

inline int intersection_size(const std::vector<int>& sel, const std::vector<int>& truth) {
    int hits = 0;
    for (int v : sel)
        if (std::find(truth.begin(), truth.end(), v) != truth.end()) ++hits;
    return hits;
}

}  // namespace detail

/// TPR = |selected ∩ truth| / |truth|, FDR = |selected \ truth| /
/// |selected|; an empty selection scores FDR 0, an empty truth TPR 1.
inline SimMetrics score_selection(const SelectionState& selected, const SimTruth& truth) {
    SimMetrics m;
    const int hit_med = detail::intersection_size(selected.mediators, truth.true_mediators);
    const int hit_int = detail::intersection_size(selected.interactions, truth.true_interactions);
    const auto n_sel_med = static_cast<int>(selected.mediators.size());
    const auto n_sel_int = static_cast<int>(selected.interactions.size());
    const auto n_true_med = static_cast<int>(truth.true_mediators.size());
    const auto n_true_int = static_cast<int>(truth.true_interactions.size());

    m.tpr_med = n_true_med == 0 ? 1.0 : static_cast<double>(hit_med) / n_true_med;
    m.tpr_int = n_true_int == 0 ? 1.0 : static_cast<double>(hit_int) / n_true_int;
    m.fdr_med = n_sel_med == 0 ? 0.0 : static_cast<double>(n_sel_med - hit_med) / n_sel_med;
    m.fdr_int = n_sel_int == 0 ? 0.0 : static_cast<double>(n_sel_int - hit_int) / n_sel_int;
    return m;
}

/// One output row of the experiment grid: the cell, the requested run
/// count, metric means over the runs that completed, and how many of
/// those runs also met the outer-loop tolerance.
struct GridRow {
    int N = 0;
    int V = 0;
    double ES = 0.0;
    int runs = 0;
    double tpr_med = 0.0;
    double fdr_med = 0.0;
    double tpr_int = 0.0;
    double fdr_int = 0.0;
    int converged_runs = 0;
};

/// Called once per generated dataset when a sink is installed (used by
/// the CLI's --dump-data). May run from worker threads; distinct runs
/// always get distinct arguments.
using DatasetSink = std::function<void(int N, int V, double ES, int run, const Dataset&)>;

/// Runs `runs` generate -> run_path -> score cycles for every (N, V, ES)
/// cell. Run r of every cell uses seed base_seed + r, each run owns its
/// generator and solver state, and results are merged by (cell, run)
/// index, so the table is identical for any `jobs`. A run whose solver
/// throws is dropped from the cell means and the convergence count
/// instead of aborting the grid.
inline std::vector<GridRow> run_grid(const std::vector<int>& Ns, const std::vector<int>& Vs,
                                     const std::vector<double>& ESs, int runs,
                                     std::uint64_t base_seed, const PathConfig& cfg = {},
                                     int jobs = 1, const DatasetSink& sink = {}) {
    if (runs < 1) throw Error("run_grid: runs must be positive");
    if (Ns.empty() || Vs.empty() || ESs.empty()) throw Error("run_grid: empty grid axis");
    validate(cfg);

    struct Cell {
        int N, V;
        double ES;
    };
    std::vector<Cell> cells;
    for (int N : Ns)
        for (int V : Vs)
            for (double ES : ESs) cells.push_back({N, V, ES});

    struct RunOutcome {
        SimMetrics metrics;
        bool completed = false;
        bool converged = false;
    };
    const std::size_t total = cells.size() * static_cast<std::size_t>(runs);
    std::vector<RunOutcome> outcomes(total);

    auto execute = [&](std::size_t task) {
        const Cell& cell = cells[task / runs];
        const int r = static_cast<int>(task % runs);
        SimTruth truth;
        truth.effect_size = cell.ES;
        const Dataset d = generate_dataset(cell.N, cell.V, truth, base_seed + r);
        if (sink) sink(cell.N, cell.V, cell.ES, r, d);
        RunOutcome& out = outcomes[task];
        try {
            const PathResult fit = run_path(d, cfg);
            out.metrics = score_selection(fit.steps[fit.chosen].state, truth);
            out.converged = fit.steps[fit.chosen].converged;
            out.completed = true;
        } catch (const Error&) {
            out.completed = false;
        }
    };

    if (jobs <= 1) {
        for (std::size_t t = 0; t < total; ++t) execute(t);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t t = next.fetch_add(1); t < total; t = next.fetch_add(1)) execute(t);
        };
        std::vector<std::thread> pool;
        const int nthreads = std::min<int>(jobs, static_cast<int>(total));
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<GridRow> table;
    table.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        GridRow row;
        row.N = cells[c].N;
        row.V = cells[c].V;
        row.ES = cells[c].ES;
        row.runs = runs;
        int completed = 0;
        for (int r = 0; r < runs; ++r) {
            const RunOutcome& out = outcomes[c * runs + r];
            if (!out.completed) continue;
            ++completed;
            if (out.converged) ++row.converged_runs;
            row.tpr_med += out.metrics.tpr_med;
            row.fdr_med += out.metrics.fdr_med;
            row.tpr_int += out.metrics.tpr_int;
            row.fdr_int += out.metrics.fdr_int;
        }
        if (completed > 0) {
            row.tpr_med /= completed;
            row.fdr_med /= completed;
            row.tpr_int /= completed;
            row.fdr_int /= completed;
        }
        table.push_back(row);
    }
    return table;
}

}  // namespace xmint
