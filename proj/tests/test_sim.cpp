#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "xmint/csv.hpp"
#include "xmint/simulate.hpp"

TEST_CASE("generate_dataset is deterministic in the seed") {
    const auto a = xmint::generate_dataset(50, 6, xmint::SimTruth{}, 123);
    const auto b = xmint::generate_dataset(50, 6, xmint::SimTruth{}, 123);
    const auto c = xmint::generate_dataset(50, 6, xmint::SimTruth{}, 124);
    CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.Y - b.Y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.M - b.M).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.X - c.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("generate_dataset: noise mediators are uncorrelated with the exposure") {
    xmint::SimTruth truth;
    truth.effect_size = 1e-12;
    const auto d = xmint::generate_dataset(10000, 6, truth, 42);
    const Eigen::VectorXd xc = d.X.array() - d.X.mean();
    const Eigen::VectorXd mc = d.M.col(4).array() - d.M.col(4).mean();
    const double r = xc.dot(mc) / std::sqrt(xc.squaredNorm() * mc.squaredNorm());
    CHECK(std::abs(r) < 0.05);
}

TEST_CASE("generate_dataset: the M1 slope on X approaches ES at large N") {
    const auto d = xmint::generate_dataset(10000, 5, xmint::SimTruth{}, 11);
    const Eigen::VectorXd xc = d.X.array() - d.X.mean();
    const Eigen::VectorXd mc = d.M.col(0).array() - d.M.col(0).mean();
    const double slope = xc.dot(mc) / xc.squaredNorm();
    CHECK(slope == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("generate_dataset validates truth and sizes") {
    xmint::SimTruth bad_es;
    bad_es.effect_size = 0.0;
    CHECK_THROWS_AS(xmint::generate_dataset(50, 5, bad_es, 1), xmint::InvalidTruth);

    xmint::SimTruth out_of_range;
    out_of_range.true_mediators = {0, 7};
    CHECK_THROWS_AS(xmint::generate_dataset(50, 5, out_of_range, 1), xmint::InvalidTruth);

    xmint::SimTruth bad_int;
    bad_int.true_interactions = {5};
    CHECK_THROWS_AS(xmint::generate_dataset(50, 5, bad_int, 1), xmint::InvalidTruth);

    CHECK_THROWS_AS(xmint::generate_dataset(2, 5, xmint::SimTruth{}, 1), xmint::InvalidData);
    CHECK_THROWS_AS(xmint::generate_dataset(50, 0, xmint::SimTruth{}, 1), xmint::InvalidData);
}

TEST_CASE("score_selection counts hits and false discoveries") {
    xmint::SimTruth truth;  // mediators {0,1,2}, interactions {0}

    xmint::SelectionState exact;
    exact.mediators = {0, 1, 2};
    exact.interactions = {0};
    const auto m_exact = xmint::score_selection(exact, truth);
    CHECK(m_exact.tpr_med == 1.0);
    CHECK(m_exact.fdr_med == 0.0);
    CHECK(m_exact.tpr_int == 1.0);
    CHECK(m_exact.fdr_int == 0.0);

    xmint::SelectionState partial;
    partial.mediators = {0, 1, 3};
    const auto m_partial = xmint::score_selection(partial, truth);
    CHECK(m_partial.tpr_med == Catch::Approx(2.0 / 3.0));
    CHECK(m_partial.fdr_med == Catch::Approx(1.0 / 3.0));
    CHECK(m_partial.tpr_int == 0.0);
    CHECK(m_partial.fdr_int == 0.0);

    const auto m_empty = xmint::score_selection({}, truth);
    CHECK(m_empty.tpr_med == 0.0);
    CHECK(m_empty.fdr_med == 0.0);

    xmint::SimTruth empty_truth;
    empty_truth.true_mediators = {};
    empty_truth.true_interactions = {};
    const auto m_null = xmint::score_selection({}, empty_truth);
    CHECK(m_null.tpr_med == 1.0);
    CHECK(m_null.fdr_med == 0.0);
    const auto m_false = xmint::score_selection(partial, empty_truth);
    CHECK(m_false.tpr_med == 1.0);
    CHECK(m_false.fdr_med == 1.0);
}

TEST_CASE("run_grid with a single run reports that run's metrics") {
    const auto table = xmint::run_grid({60}, {5}, {1.0}, 1, 11);
    REQUIRE(table.size() == 1);

    xmint::SimTruth truth;
    truth.effect_size = 1.0;
    const auto d = xmint::generate_dataset(60, 5, truth, 11);
    const auto fit = xmint::run_path(d);
    const auto metrics = xmint::score_selection(fit.steps[fit.chosen].state, truth);

    CHECK(table[0].tpr_med == metrics.tpr_med);
    CHECK(table[0].fdr_med == metrics.fdr_med);
    CHECK(table[0].tpr_int == metrics.tpr_int);
    CHECK(table[0].fdr_int == metrics.fdr_int);
    CHECK(table[0].runs == 1);
    CHECK(table[0].converged_runs == (fit.steps[fit.chosen].converged ? 1 : 0));
}

TEST_CASE("run_grid emits cells in nested N, V, ES order with metrics in range") {
    const auto table = xmint::run_grid({40, 60}, {4}, {0.5, 1.0}, 1, 3);
    REQUIRE(table.size() == 4);
    CHECK(table[0].N == 40);
    CHECK(table[0].ES == 0.5);
    CHECK(table[1].N == 40);
    CHECK(table[1].ES == 1.0);
    CHECK(table[2].N == 60);
    CHECK(table[2].ES == 0.5);
    CHECK(table[3].N == 60);
    CHECK(table[3].ES == 1.0);
    for (const auto& row : table) {
        for (double m : {row.tpr_med, row.fdr_med, row.tpr_int, row.fdr_int}) {
            CHECK(m >= 0.0);
            CHECK(m <= 1.0);
        }
        CHECK(row.converged_runs <= row.runs);
    }
}

TEST_CASE("run_grid is reproducible for a fixed base seed") {
    const auto t1 = xmint::run_grid({50}, {4}, {1.0}, 3, 21);
    const auto t2 = xmint::run_grid({50}, {4}, {1.0}, 3, 21);
    CHECK(xmint::grid_csv(t1) == xmint::grid_csv(t2));
}

TEST_CASE("run_grid parallel execution matches serial execution") {
    const auto serial = xmint::run_grid({60}, {4}, {0.5, 1.0}, 3, 5, {}, 1);
    const auto parallel = xmint::run_grid({60}, {4}, {0.5, 1.0}, 3, 5, {}, 3);
    CHECK(xmint::grid_csv(serial) == xmint::grid_csv(parallel));
}

TEST_CASE("run_grid passes every generated dataset to the sink") {
    struct Seen {
        int N, V, run;
        double ES;
        Eigen::VectorXd x;
    };
    std::vector<Seen> seen;
    auto sink = [&](int N, int V, double ES, int run, const xmint::Dataset& d) {
        seen.push_back({N, V, run, ES, d.X});
    };
    xmint::run_grid({40}, {4}, {1.0}, 2, 9, {}, 1, sink);
    REQUIRE(seen.size() == 2);

    xmint::SimTruth truth;
    truth.effect_size = 1.0;
    for (const auto& s : seen) {
        CHECK(s.N == 40);
        CHECK(s.V == 4);
        const auto d = xmint::generate_dataset(40, 4, truth, 9 + s.run);
        CHECK((s.x - d.X).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("run_grid drops failed runs instead of aborting") {
    xmint::PathConfig cfg;
    cfg.max_enlarge = 1;  // guarantees EnlargementExhausted on real signal
    const auto table = xmint::run_grid({60}, {4}, {1.0}, 2, 13, cfg);
    REQUIRE(table.size() == 1);
    CHECK(table[0].converged_runs == 0);
    CHECK(table[0].tpr_med == 0.0);
    CHECK(table[0].fdr_med == 0.0);
}

TEST_CASE("run_grid rejects empty grids and nonpositive run counts") {
    CHECK_THROWS_AS(xmint::run_grid({}, {4}, {1.0}, 1, 1), xmint::Error);
    CHECK_THROWS_AS(xmint::run_grid({50}, {4}, {1.0}, 0, 1), xmint::Error);
}
