#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "xmint/coefficients.hpp"
#include "xmint/dataset.hpp"
#include "xmint/error.hpp"
#include "xmint/precision.hpp"
#include "xmint/score.hpp"
#include "xmint/solver.hpp"

namespace xmint {

struct PathConfig {
    int K = 20;                   // path length
    double zeta = 0.05;           // lambda_min / lambda_max
    double enlarge_factor = 1.5;  // lambda_max growth when the start is not null
    int max_enlarge = 20;         // cap on enlargement retries
    int outer_max_iter = 50;      // alternation cycles per lambda
    double outer_tol = 1e-5;      // relative objective change across one cycle
    double select_tol = 1e-8;     // nonzero-coefficient tolerance
    SolverConfig solver{};
    GlassoConfig glasso{};
};

inline void validate(const PathConfig& cfg) {
    if (cfg.K < 2) throw Error("PathConfig: K must be at least 2");
    if (!(cfg.zeta > 0.0 && cfg.zeta < 1.0)) throw Error("PathConfig: zeta must be in (0,1)");
    if (!(cfg.enlarge_factor > 1.0)) throw Error("PathConfig: enlarge_factor must exceed 1");
    if (cfg.max_enlarge < 1) throw Error("PathConfig: max_enlarge must be positive");
    if (cfg.outer_max_iter < 1) throw Error("PathConfig: outer_max_iter must be positive");
    if (!(cfg.outer_tol > 0.0)) throw Error("PathConfig: outer_tol must be positive");
    if (!(cfg.select_tol > 0.0)) throw Error("PathConfig: select_tol must be positive");
}

/// The 0/1 penalty factors actually applied at one path step; exposed so
/// the adaptive-penalty rule can be checked from outside.
struct StepFactors {
    Eigen::VectorXd a;
    Eigen::VectorXd b1;
    Eigen::VectorXd b2;
};

struct PathStep {
    double lambda = 0.0;
    CoefficientSet coeffs;
    NuisanceParams nuisance;
    SelectionState state;
    double loglik = 0.0;
    int df = 0;
    double hbic = 0.0;
    bool converged = false;
    int outer_cycles = 0;
    StepFactors factors;
};

struct PathResult {
    std::vector<PathStep> steps;  // lambda decreasing; steps[0] is the null start
    int chosen = 0;               // index of the HBIC-minimizing step
    PathConfig config_echo;
};

/// lambda_max = n^{-1} max |[X M X*M]' Y| on standardized data.
inline double lambda_max(const StandardizedDataset& sd,
                         const Eigen::Ref<const Eigen::MatrixXd>& XM) {
    const double n = static_cast<double>(sd.data.n());
    double m = (sd.data.X.dot(sd.data.Y) < 0 ? -sd.data.X.dot(sd.data.Y)
                                             : sd.data.X.dot(sd.data.Y));
    m = std::max(m, (sd.data.M.transpose() * sd.data.Y).cwiseAbs().maxCoeff());
    m = std::max(m, (XM.transpose() * sd.data.Y).cwiseAbs().maxCoeff());
    return m / n;
}

inline double lambda_max(const StandardizedDataset& sd) {
    return lambda_max(sd, interaction_columns(sd.data.X, sd.data.M));
}

namespace detail {

/// Geometric ladder lambda_k = lmax * zeta^{(k-1)/(K-1)}, k = 1..K.
inline std::vector<double> geometric_sequence(double lmax, double zeta, int K) {
    std::vector<double> seq(K);
    for (int k = 0; k < K; ++k)
        seq[k] = lmax * std::pow(zeta, static_cast<double>(k) / static_cast<double>(K - 1));
    return seq;
}

}  // namespace detail

inline std::vector<double> lambda_sequence(const StandardizedDataset& sd, const PathConfig& cfg) {
    validate(cfg);
    return detail::geometric_sequence(lambda_max(sd), cfg.zeta, cfg.K);
}

namespace detail {

/// Adaptive penalty factors from the previous step's selection: a_v and
/// b1_v are free once v was a mediator or carried an interaction; b2_v is
/// free only once v carried an interaction (which also frees the main
/// effect, keeping the hierarchy).
inline StepFactors penalty_factors(const SelectionState& prev, Eigen::Index V) {
    StepFactors f;
    f.a = Eigen::VectorXd::Ones(V);
    f.b1 = Eigen::VectorXd::Ones(V);
    f.b2 = Eigen::VectorXd::Ones(V);
    for (int v : prev.mediators) {
        f.a[v] = 0.0;
        f.b1[v] = 0.0;
    }
    for (int v : prev.interactions) {
        f.a[v] = 0.0;
        f.b1[v] = 0.0;
        f.b2[v] = 0.0;
    }
    return f;
}

/// Penalized objective: the negative log-likelihood core plus the three
/// adaptive L1 terms. Used only for outer-loop convergence monitoring.
inline double objective_value(const StandardizedDataset& sd,
                              const Eigen::Ref<const Eigen::MatrixXd>& XM, double lambda,
                              const StepFactors& f, const CoefficientSet& coeffs,
                              const NuisanceParams& nuis) {
    const Eigen::Index n = sd.data.n();
    const Eigen::Index V = sd.data.V();
    const double dn = static_cast<double>(n);

    Eigen::LLT<Eigen::MatrixXd> llt(nuis.omega);
    if (llt.info() != Eigen::Success) throw OmegaNotPD("objective_value: omega not PD");
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < V; ++j) logdet += 2.0 * std::log(llt.matrixL()(j, j));

    const Eigen::VectorXd yres = sd.data.Y - Eigen::VectorXd::Constant(n, coeffs.c0) -
                                 coeffs.c * sd.data.X - sd.data.M * coeffs.b1 - XM * coeffs.b2;
    Eigen::MatrixXd R = sd.data.M;
    R.rowwise() -= coeffs.a0.transpose();
    R.noalias() -= sd.data.X * coeffs.a.transpose();
    const double quad = ((R * nuis.omega).cwiseProduct(R)).sum();

    double l1 = 0.0;
    for (Eigen::Index v = 0; v < V; ++v)
        l1 += f.b1[v] * std::abs(coeffs.b1[v]) + f.b2[v] * std::abs(coeffs.b2[v]) +
              f.a[v] * std::abs(coeffs.a[v]);

    return dn * std::log(nuis.sigma2) - dn * logdet + quad + yres.squaredNorm() / nuis.sigma2 +
           lambda * l1;
}

inline bool is_null_model(const CoefficientSet& coeffs, double tol) {
    return extract_selection(coeffs, tol).empty() && coeffs.b2.cwiseAbs().maxCoeff() <= tol;
}

/// One path step: set penalties from the previous selection, then
/// alternate outcome solve / mediator solve / sigma2 / Omega until the
/// objective stabilizes. `glasso_io`, when given, carries the precision
/// solver's working state across calls as a warm start.
inline PathStep fit_at_lambda_impl(const StandardizedDataset& sd,
                                   const Eigen::Ref<const Eigen::MatrixXd>& XM, double lambda,
                                   const SelectionState& prev, const CoefficientSet& warm_coeffs,
                                   const NuisanceParams& warm_nuis, const PathConfig& cfg,
                                   GlassoResult* glasso_io) {
    const Eigen::Index n = sd.data.n();
    const Eigen::Index V = sd.data.V();

    PathStep step;
    step.lambda = lambda;
    step.factors = penalty_factors(prev, V);
    step.coeffs = warm_coeffs;
    step.nuisance = warm_nuis;

    PenaltySpec outcome_pen;
    outcome_pen.lambda = lambda;
    outcome_pen.factors.resize(2 * V);
    outcome_pen.factors.head(V) = step.factors.b1;
    outcome_pen.factors.tail(V) = step.factors.b2;

    std::vector<int> penalized_a;
    for (Eigen::Index v = 0; v < V; ++v)
        if (step.factors.a[v] == 1.0) penalized_a.push_back(static_cast<int>(v));

    double obj_prev = objective_value(sd, XM, lambda, step.factors, step.coeffs, step.nuisance);

    // The outcome solve is run at the unit working variance of the
    // standardized outcome. Feeding the running sigma2 estimate back into
    // the soft threshold collapses the penalty as soon as real signal is
    // found (the standardized noise variance is 1/var(Y) << 1) and floods
    // the model with false positives; the estimate still drives the
    // likelihood, the HBIC, and the convergence monitor below.
    constexpr double working_sigma2 = 1.0;

    for (int cycle = 0; cycle < cfg.outer_max_iter; ++cycle) {
        OutcomeFit of = outcome_step(sd.data.Y, sd.data.X, sd.data.M, XM, working_sigma2,
                                     outcome_pen, step.coeffs, cfg.solver);
        step.coeffs.c0 = of.c0;
        step.coeffs.c = of.c;
        step.coeffs.b1 = std::move(of.b1);
        step.coeffs.b2 = std::move(of.b2);

        MediatorFit mf = mediator_step(sd.data.M, sd.data.X, step.nuisance.omega, lambda,
                                       penalized_a, step.coeffs.a0, step.coeffs.a, cfg.solver);
        step.coeffs.a0 = std::move(mf.a0);
        step.coeffs.a = std::move(mf.a);

        const Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, step.coeffs.c0) +
                                       step.coeffs.c * sd.data.X + sd.data.M * step.coeffs.b1 +
                                       XM * step.coeffs.b2;
        step.nuisance.sigma2 = estimate_sigma2(sd.data.Y, fitted);

        const Eigen::MatrixXd S =
            residual_covariance(sd.data.M, sd.data.X, step.coeffs.a0, step.coeffs.a);
        GlassoResult gl =
            estimate_precision_full(S, cfg.glasso, (glasso_io && glasso_io->omega.rows() == V)
                                                       ? glasso_io
                                                       : nullptr);
        step.nuisance.omega = gl.omega;
        if (glasso_io) *glasso_io = std::move(gl);

        step.outer_cycles = cycle + 1;
        const double obj =
            objective_value(sd, XM, lambda, step.factors, step.coeffs, step.nuisance);
        if (std::abs(obj - obj_prev) <= cfg.outer_tol * (std::abs(obj_prev) + 1e-12)) {
            step.converged = true;
            break;
        }
        obj_prev = obj;
    }

    step.state = extract_selection(step.coeffs, cfg.select_tol);
    step.loglik = log_likelihood(sd, XM, step.coeffs, step.nuisance);
    step.df = degrees_of_freedom(step.coeffs, cfg.select_tol);
    step.hbic = hbic(step.loglik, step.df, static_cast<int>(n));
    return step;
}

}  // namespace detail

inline PathStep fit_at_lambda(const StandardizedDataset& sd, double lambda,
                              const SelectionState& prev, const CoefficientSet& warm_coeffs,
                              const NuisanceParams& warm_nuis, const PathConfig& cfg = {}) {
    validate(cfg);
    const Eigen::MatrixXd XM = interaction_columns(sd.data.X, sd.data.M);
    return detail::fit_at_lambda_impl(sd, XM, lambda, prev, warm_coeffs, warm_nuis, cfg, nullptr);
}

/// Full three-phase procedure: standardize, build the lambda ladder with
/// the null-start safeguard, sweep it with adaptive penalties and warm
/// starts, then pick the HBIC minimizer. The reported final model has its
/// mediator set closed under the selected interactions.
inline PathResult run_path(const Dataset& d, const PathConfig& cfg = {}) {
    validate(cfg);
    const StandardizedDataset sd = standardize(d);
    const Eigen::MatrixXd XM = interaction_columns(sd.data.X, sd.data.M);
    const Eigen::Index V = sd.data.V();

    double lmax = lambda_max(sd, XM);
    if (!(lmax > 1e-12))
        throw DegenerateInput("run_path: lambda_max is zero; Y is orthogonal to every column");

    const SelectionState empty_state;
    const CoefficientSet zero_coeffs = CoefficientSet::zero(V);
    const NuisanceParams init_nuis = NuisanceParams::identity(V);
    GlassoResult glasso_warm;

    // Enlarge lambda_max until the first fit is a null model: empty
    // selection and no surviving interaction coefficient.
    PathStep first;
    bool null_start = false;
    for (int attempt = 0; attempt <= cfg.max_enlarge; ++attempt) {
        first = detail::fit_at_lambda_impl(sd, XM, lmax, empty_state, zero_coeffs, init_nuis, cfg,
                                           &glasso_warm);
        if (detail::is_null_model(first.coeffs, cfg.select_tol)) {
            null_start = true;
            break;
        }
        if (attempt == cfg.max_enlarge) break;
        lmax *= cfg.enlarge_factor;
    }
    if (!null_start)
        throw EnlargementExhausted("run_path: no null starting model after " +
                                   std::to_string(cfg.max_enlarge) + " enlargements");

    const std::vector<double> lambdas = detail::geometric_sequence(lmax, cfg.zeta, cfg.K);

    PathResult res;
    res.config_echo = cfg;
    res.steps.reserve(cfg.K);
    res.steps.push_back(std::move(first));
    for (int k = 1; k < cfg.K; ++k) {
        const PathStep& prev = res.steps.back();
        res.steps.push_back(detail::fit_at_lambda_impl(sd, XM, lambdas[k], prev.state,
                                                       prev.coeffs, prev.nuisance, cfg,
                                                       &glasso_warm));
    }

    res.chosen = 0;
    for (int k = 1; k < cfg.K; ++k)
        if (res.steps[k].hbic < res.steps[res.chosen].hbic) res.chosen = k;

    res.steps[res.chosen].state = res.steps[res.chosen].state.hierarchy_closure();
    return res;
}

}  // namespace xmint
