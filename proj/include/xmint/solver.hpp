#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "xmint/coefficients.hpp"
#include "xmint/error.hpp"

namespace xmint {

/// Penalty level plus per-coefficient 0/1 multipliers. A factor of 0 means
/// the coefficient is free (never shrunk); 1 means it is penalized at
/// lambda. For outcome_step the factors vector has 2V entries laid out as
/// [b1_1..b1_V, b2_1..b2_V].
struct PenaltySpec {
    double lambda = 0.0;
    Eigen::VectorXd factors;
};

struct SolverConfig {
    int max_iter = 10000;      // coordinate-descent sweep cap
    double coord_tol = 1e-7;   // stop when no coefficient moves more than this in a sweep

    // Test instrumentation: when set, the penalized objective value is
    // appended after every sweep.
    std::vector<double>* objective_trace = nullptr;
};

/// sign(z) * max(|z| - gamma, 0).
inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

struct OutcomeFit {
    double c0 = 0.0;
    double c = 0.0;
    Eigen::VectorXd b1;
    Eigen::VectorXd b2;
    int sweeps = 0;
};

/// Minimizes
///   (1/sigma2) * sum_i (Y_i - c0 - c X_i - M_i'b1 - XM_i'b2)^2
///     + lambda * sum_v f1_v |b1_v| + lambda * sum_v f2_v |b2_v|
/// by cyclic coordinate descent with warm start. c0 and c are never
/// penalized. Each coordinate update is an exact one-dimensional
/// minimization, so the objective never increases within a sweep.
inline OutcomeFit outcome_step(const Eigen::Ref<const Eigen::VectorXd>& Y,
                               const Eigen::Ref<const Eigen::VectorXd>& X,
                               const Eigen::Ref<const Eigen::MatrixXd>& M,
                               const Eigen::Ref<const Eigen::MatrixXd>& XM, double sigma2,
                               const PenaltySpec& penalty, const CoefficientSet& warm,
                               const SolverConfig& cfg = {}) {
    const Eigen::Index n = Y.size();
    const Eigen::Index V = M.cols();
    if (X.size() != n || M.rows() != n || XM.rows() != n || XM.cols() != V)
        throw DimensionMismatch("outcome_step: input shapes disagree");
    if (!(sigma2 > 0.0)) throw NonPositiveSigma2("outcome_step: sigma2 must be positive");
    if (penalty.lambda < 0.0) throw Error("outcome_step: lambda must be nonnegative");
    if (penalty.factors.size() != 2 * V)
        throw DimensionMismatch("outcome_step: penalty.factors must have 2V entries");
    for (Eigen::Index j = 0; j < penalty.factors.size(); ++j)
        if (penalty.factors[j] != 0.0 && penalty.factors[j] != 1.0)
            throw Error("outcome_step: penalty factors must be 0 or 1");
    if (warm.b1.size() != V || warm.b2.size() != V)
        throw DimensionMismatch("outcome_step: warm coefficients have wrong size");

    OutcomeFit fit;
    fit.c0 = warm.c0;
    fit.c = warm.c;
    fit.b1 = warm.b1;
    fit.b2 = warm.b2;

    const double sxx = X.squaredNorm();
    Eigen::VectorXd sm(V), sxm(V);
    for (Eigen::Index v = 0; v < V; ++v) {
        sm[v] = M.col(v).squaredNorm();
        sxm[v] = XM.col(v).squaredNorm();
    }

    // Soft-threshold levels: solving d/db [ (1/s2)(b^2 s - 2 b z) + lam f |b| ] = 0
    // gives b = S(z, lam f s2 / 2) / s.
    const double half_pen = 0.5 * penalty.lambda * sigma2;

    Eigen::VectorXd r = Y - Eigen::VectorXd::Constant(n, fit.c0) - fit.c * X - M * fit.b1 -
                        XM * fit.b2;

    auto objective = [&]() {
        double l1 = 0.0;
        for (Eigen::Index v = 0; v < V; ++v)
            l1 += penalty.factors[v] * std::abs(fit.b1[v]) +
                  penalty.factors[V + v] * std::abs(fit.b2[v]);
        return r.squaredNorm() / sigma2 + penalty.lambda * l1;
    };

    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_change = 0.0;

        const double dc0 = r.mean();
        fit.c0 += dc0;
        r.array() -= dc0;
        max_change = std::max(max_change, std::abs(dc0));

        if (sxx > 0.0) {
            const double dc = X.dot(r) / sxx;
            fit.c += dc;
            r -= dc * X;
            max_change = std::max(max_change, std::abs(dc));
        }

        for (Eigen::Index v = 0; v < V; ++v) {
            if (sm[v] <= 0.0) continue;
            const double z = M.col(v).dot(r) + sm[v] * fit.b1[v];
            const double bnew = soft_threshold(z, half_pen * penalty.factors[v]) / sm[v];
            const double d = bnew - fit.b1[v];
            if (d != 0.0) {
                r -= d * M.col(v);
                fit.b1[v] = bnew;
                max_change = std::max(max_change, std::abs(d));
            }
        }
        for (Eigen::Index v = 0; v < V; ++v) {
            if (sxm[v] <= 0.0) continue;
            const double z = XM.col(v).dot(r) + sxm[v] * fit.b2[v];
            const double bnew = soft_threshold(z, half_pen * penalty.factors[V + v]) / sxm[v];
            const double d = bnew - fit.b2[v];
            if (d != 0.0) {
                r -= d * XM.col(v);
                fit.b2[v] = bnew;
                max_change = std::max(max_change, std::abs(d));
            }
        }

        fit.sweeps = sweep + 1;
        if (cfg.objective_trace) cfg.objective_trace->push_back(objective());
        if (max_change < cfg.coord_tol) return fit;
    }

    std::vector<double> iterate{fit.c0, fit.c};
    iterate.insert(iterate.end(), fit.b1.data(), fit.b1.data() + V);
    iterate.insert(iterate.end(), fit.b2.data(), fit.b2.data() + V);
    throw NonConvergence("outcome_step: no convergence after " + std::to_string(cfg.max_iter) +
                             " sweeps",
                         std::move(iterate), fit.sweeps);
}

struct MediatorFit {
    Eigen::VectorXd a0;
    Eigen::VectorXd a;
    int sweeps = 0;
};

/// Minimizes
///   sum_i (M_i - a0 - a X_i)' Omega (M_i - a0 - a X_i)
///     + lambda * sum_{v in penalized} |a_v|
/// by cyclic coordinate descent. The a_v update has quadratic coefficient
/// Omega_vv * sum_i X_i^2 and soft threshold lambda/2 on the partial
/// residual inner product; Omega couples the coordinates, so the sweep
/// works on t = R'X rather than per-column residuals.
inline MediatorFit mediator_step(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                 const Eigen::Ref<const Eigen::VectorXd>& X,
                                 const Eigen::Ref<const Eigen::MatrixXd>& omega, double lambda,
                                 const std::vector<int>& penalized,
                                 const Eigen::Ref<const Eigen::VectorXd>& warm_a0,
                                 const Eigen::Ref<const Eigen::VectorXd>& warm_a,
                                 const SolverConfig& cfg = {}) {
    const Eigen::Index n = X.size();
    const Eigen::Index V = M.cols();
    if (M.rows() != n) throw DimensionMismatch("mediator_step: X and M row counts disagree");
    if (omega.rows() != V || omega.cols() != V)
        throw DimensionMismatch("mediator_step: omega must be V x V");
    if (warm_a0.size() != V || warm_a.size() != V)
        throw DimensionMismatch("mediator_step: warm coefficients have wrong size");
    if (lambda < 0.0) throw Error("mediator_step: lambda must be nonnegative");
    {
        Eigen::LLT<Eigen::MatrixXd> llt(omega);
        if (llt.info() != Eigen::Success)
            throw OmegaNotPD("mediator_step: omega is not positive definite");
    }

    std::vector<char> pen(V, 0);
    for (int v : penalized) {
        if (v < 0 || v >= V) throw Error("mediator_step: penalized index out of range");
        pen[v] = 1;
    }

    MediatorFit fit;
    fit.a0 = warm_a0;
    fit.a = warm_a;

    const double sxx = X.squaredNorm();
    const double sum_x = X.sum();
    const double xbar = sum_x / static_cast<double>(n);
    const Eigen::VectorXd mbar = M.colwise().mean();
    const Eigen::VectorXd mx = M.transpose() * X;

    // t_v = (M_v - a0_v - a_v X)' X, kept current across coordinate moves.
    Eigen::VectorXd t = mx - fit.a0 * sum_x - fit.a * sxx;

    auto objective = [&]() {
        Eigen::MatrixXd R = M;
        R.rowwise() -= fit.a0.transpose();
        R -= X * fit.a.transpose();
        double l1 = 0.0;
        for (Eigen::Index v = 0; v < V; ++v)
            if (pen[v]) l1 += std::abs(fit.a[v]);
        return ((R * omega).cwiseProduct(R)).sum() + lambda * l1;
    };

    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_change = 0.0;

        // Intercept block: Omega is invertible, so the stationary a0 given a
        // is just the per-column mean of M - aX.
        for (Eigen::Index v = 0; v < V; ++v) {
            const double a0new = mbar[v] - fit.a[v] * xbar;
            const double d = a0new - fit.a0[v];
            if (d != 0.0) {
                t[v] -= d * sum_x;
                fit.a0[v] = a0new;
                max_change = std::max(max_change, std::abs(d));
            }
        }

        for (Eigen::Index v = 0; v < V; ++v) {
            const double denom = omega(v, v) * sxx;
            if (denom <= 0.0) continue;
            const double z = omega.row(v).dot(t) + omega(v, v) * fit.a[v] * sxx;
            const double anew =
                pen[v] ? soft_threshold(z, 0.5 * lambda) / denom : z / denom;
            const double d = anew - fit.a[v];
            if (d != 0.0) {
                t[v] -= d * sxx;
                fit.a[v] = anew;
                max_change = std::max(max_change, std::abs(d));
            }
        }

        fit.sweeps = sweep + 1;
        if (cfg.objective_trace) cfg.objective_trace->push_back(objective());
        if (max_change < cfg.coord_tol) return fit;
    }

    std::vector<double> iterate(fit.a0.data(), fit.a0.data() + V);
    iterate.insert(iterate.end(), fit.a.data(), fit.a.data() + V);
    throw NonConvergence("mediator_step: no convergence after " + std::to_string(cfg.max_iter) +
                             " sweeps",
                         std::move(iterate), fit.sweeps);
}

}  // namespace xmint
