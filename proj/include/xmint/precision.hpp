#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "xmint/error.hpp"
#include "xmint/solver.hpp"

namespace xmint {

struct GlassoConfig {
    double rho = 0.1;    // off-diagonal L1 penalty on Omega; diagonal is free
    int max_iter = 200;  // outer cycles over columns
    double tol = 1e-5;   // max absolute change in Omega entries per outer cycle
    double ridge = 1e-4; // diagonal bump applied when S is not positive definite
};

/// S = (1/n) sum_i r_i r_i' with r_i = M_i - a0 - a X_i. The 1/n (ML)
/// convention keeps sum_i r_i' Omega r_i = n * trace(S Omega).
inline Eigen::MatrixXd residual_covariance(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                           const Eigen::Ref<const Eigen::VectorXd>& X,
                                           const Eigen::Ref<const Eigen::VectorXd>& a0,
                                           const Eigen::Ref<const Eigen::VectorXd>& a) {
    const Eigen::Index n = M.rows();
    const Eigen::Index V = M.cols();
    if (X.size() != n || a0.size() != V || a.size() != V)
        throw DimensionMismatch("residual_covariance: input shapes disagree");
    Eigen::MatrixXd R = M;
    R.rowwise() -= a0.transpose();
    R.noalias() -= X * a.transpose();
    Eigen::MatrixXd S = (R.transpose() * R) / static_cast<double>(n);
    return 0.5 * (S + S.transpose());
}

/// max(RSS/n, 1e-8); the floor keeps a perfect fit from collapsing the
/// outcome likelihood.
inline double estimate_sigma2(const Eigen::Ref<const Eigen::VectorXd>& Y,
                              const Eigen::Ref<const Eigen::VectorXd>& fitted) {
    if (Y.size() != fitted.size())
        throw DimensionMismatch("estimate_sigma2: length mismatch");
    const double rss = (Y - fitted).squaredNorm();
    return std::max(rss / static_cast<double>(Y.size()), 1e-8);
}

struct GlassoResult {
    Eigen::MatrixXd omega;  // precision estimate, symmetric positive definite
    Eigen::MatrixXd sigma;  // working covariance W = Omega^{-1} at convergence
    int cycles = 0;
};

/// Sparse precision estimation: maximizes
///   log|Omega| - trace(S Omega) - rho * sum_{j != k} |Omega_jk|
/// by block coordinate descent over columns. Each column subproblem is a
/// lasso on the working covariance W, whose stationarity gives the KKT
/// characterization |S - Omega^{-1}|_{jk} <= rho off the diagonal and
/// equality on the diagonal (the diagonal is unpenalized).
///
/// `warm` may carry the result of a previous call on a nearby S; it seeds
/// both W and the per-column regression coefficients.
inline GlassoResult estimate_precision_full(const Eigen::Ref<const Eigen::MatrixXd>& S_in,
                                            const GlassoConfig& cfg = {},
                                            const GlassoResult* warm = nullptr) {
    const Eigen::Index V = S_in.rows();
    if (S_in.cols() != V) throw DimensionMismatch("estimate_precision: S must be square");
    if (cfg.rho < 0.0) throw Error("estimate_precision: rho must be nonnegative");

    Eigen::MatrixXd S = 0.5 * (S_in + S_in.transpose());
    {
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) {
            S.diagonal().array() += cfg.ridge;
            Eigen::LLT<Eigen::MatrixXd> llt2(S);
            if (llt2.info() != Eigen::Success)
                throw NotPositiveDefinite(
                    "estimate_precision: S is not positive definite even after ridge");
        }
    }

    GlassoResult res;
    if (V == 1) {
        res.omega = Eigen::MatrixXd::Constant(1, 1, 1.0 / S(0, 0));
        res.sigma = S;
        res.cycles = 1;
        return res;
    }

    Eigen::MatrixXd W;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(V - 1, V);  // column j's lasso coefficients
    const bool have_warm = warm && warm->sigma.rows() == V && warm->omega.rows() == V;
    if (have_warm) {
        W = 0.5 * (warm->sigma + warm->sigma.transpose());
        W.diagonal() = S.diagonal();  // diagonal is pinned to S
        for (Eigen::Index j = 0; j < V; ++j) {
            Eigen::Index r = 0;
            for (Eigen::Index u = 0; u < V; ++u) {
                if (u == j) continue;
                B(r++, j) = -warm->omega(u, j) / warm->omega(j, j);
            }
        }
    } else {
        W = S;
    }

    const double inner_tol = std::max(1e-10, 1e-2 * cfg.tol);
    const int inner_max = 1000;

    Eigen::MatrixXd W11(V - 1, V - 1);
    Eigen::VectorXd s12(V - 1), beta(V - 1), q(V - 1);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(V, V);
    Eigen::MatrixXd omega_prev;

    auto reconstruct_omega = [&]() {
        for (Eigen::Index j = 0; j < V; ++j) {
            double dot = 0.0;
            Eigen::Index r = 0;
            for (Eigen::Index u = 0; u < V; ++u) {
                if (u == j) continue;
                dot += W(u, j) * B(r++, j);
            }
            const double denom = W(j, j) - dot;
            if (!(denom > 1e-12))
                throw NotPositiveDefinite(
                    "estimate_precision: degenerate column pivot; covariance nearly singular");
            const double theta_jj = 1.0 / denom;
            omega(j, j) = theta_jj;
            r = 0;
            for (Eigen::Index u = 0; u < V; ++u) {
                if (u == j) continue;
                omega(u, j) = -B(r++, j) * theta_jj;
            }
        }
        omega = 0.5 * (omega + Eigen::MatrixXd(omega.transpose()));
    };

    for (int cycle = 0; cycle < cfg.max_iter; ++cycle) {
        for (Eigen::Index j = 0; j < V; ++j) {
            // Gather the V-1 x V-1 block excluding row/column j.
            Eigen::Index r = 0;
            for (Eigen::Index u = 0; u < V; ++u) {
                if (u == j) continue;
                s12[r] = S(u, j);
                beta[r] = B(r, j);
                Eigen::Index cpos = 0;
                for (Eigen::Index w = 0; w < V; ++w) {
                    if (w == j) continue;
                    W11(r, cpos++) = W(u, w);
                }
                ++r;
            }

            // Lasso: min 0.5 b'W11 b - s12'b + rho ||b||_1, warm-started.
            q.noalias() = W11 * beta;
            for (int it = 0; it < inner_max; ++it) {
                double max_d = 0.0;
                for (Eigen::Index u = 0; u < V - 1; ++u) {
                    const double duu = W11(u, u);
                    if (duu <= 0.0) continue;
                    const double z = s12[u] - q[u] + duu * beta[u];
                    const double bnew = soft_threshold(z, cfg.rho) / duu;
                    const double d = bnew - beta[u];
                    if (d != 0.0) {
                        q += d * W11.col(u);
                        beta[u] = bnew;
                        max_d = std::max(max_d, std::abs(d));
                    }
                }
                if (max_d < inner_tol) break;
            }

            B.col(j) = beta;
            r = 0;
            for (Eigen::Index u = 0; u < V; ++u) {
                if (u == j) continue;
                W(u, j) = q[r];
                W(j, u) = q[r];
                ++r;
            }
        }

        reconstruct_omega();
        res.cycles = cycle + 1;
        if (cycle > 0) {
            const double change = (omega - omega_prev).cwiseAbs().maxCoeff();
            if (change < cfg.tol) {
                res.omega = omega;
                res.sigma = W;
                return res;
            }
        }
        omega_prev = omega;
    }
    throw NonConvergence("estimate_precision: no convergence after " +
                             std::to_string(cfg.max_iter) + " cycles",
                         std::vector<double>(omega.data(), omega.data() + V * V),
                         cfg.max_iter);
}

inline Eigen::MatrixXd estimate_precision(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                          const GlassoConfig& cfg = {}) {
    return estimate_precision_full(S, cfg).omega;
}

}  // namespace xmint
