#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "xmint/coefficients.hpp"
#include "xmint/dataset.hpp"
#include "xmint/error.hpp"

namespace xmint {

/// Joint Gaussian log-likelihood of the two-equation model,
///   sum_i log f(Y_i | M_i) + log f(M_i),
/// i.e.
///   -(n(1+V)/2) log(2*pi) - (n/2) log sigma2 + (n/2) log|Omega|
///   - RSS/(2 sigma2) - (1/2) sum_i (M_i - a0 - a X_i)' Omega (...).
/// log|Omega| comes from a Cholesky factorization.
inline double log_likelihood(const StandardizedDataset& sd,
                             const Eigen::Ref<const Eigen::MatrixXd>& XM,
                             const CoefficientSet& coeffs, const NuisanceParams& nuis) {
    const Eigen::Index n = sd.data.n();
    const Eigen::Index V = sd.data.V();
    if (coeffs.V() != V || nuis.omega.rows() != V)
        throw DimensionMismatch("log_likelihood: coefficient/omega size mismatch");
    if (!(nuis.sigma2 > 0.0)) throw NonPositiveSigma2("log_likelihood: sigma2 must be positive");

    Eigen::LLT<Eigen::MatrixXd> llt(nuis.omega);
    if (llt.info() != Eigen::Success)
        throw OmegaNotPD("log_likelihood: omega is not positive definite");
    double logdet_omega = 0.0;
    for (Eigen::Index j = 0; j < V; ++j) logdet_omega += 2.0 * std::log(llt.matrixL()(j, j));

    const Eigen::VectorXd yres = sd.data.Y -
                                 Eigen::VectorXd::Constant(n, coeffs.c0) - coeffs.c * sd.data.X -
                                 sd.data.M * coeffs.b1 - XM * coeffs.b2;
    const double rss = yres.squaredNorm();

    Eigen::MatrixXd R = sd.data.M;
    R.rowwise() -= coeffs.a0.transpose();
    R.noalias() -= sd.data.X * coeffs.a.transpose();
    const double quad = ((R * nuis.omega).cwiseProduct(R)).sum();

    const double dn = static_cast<double>(n);
    return -0.5 * dn * (1.0 + static_cast<double>(V)) * std::log(2.0 * M_PI) -
           0.5 * dn * std::log(nuis.sigma2) + 0.5 * dn * logdet_omega - rss / (2.0 * nuis.sigma2) -
           0.5 * quad;
}

inline double log_likelihood(const StandardizedDataset& sd, const CoefficientSet& coeffs,
                             const NuisanceParams& nuis) {
    return log_likelihood(sd, interaction_columns(sd.data.X, sd.data.M), coeffs, nuis);
}

/// Free-parameter count for model comparison: nonzero a, b1, b2 entries
/// plus one for the direct effect c. Intercepts, sigma2, and Omega are
/// common to every candidate model along a path and drop out of the
/// comparison.
inline int degrees_of_freedom(const CoefficientSet& coeffs, double tol = 1e-8) {
    if (!(tol > 0.0)) throw Error("degrees_of_freedom: tol must be positive");
    int d = 1;  // c
    for (Eigen::Index v = 0; v < coeffs.V(); ++v) {
        if (std::abs(coeffs.a[v]) > tol) ++d;
        if (std::abs(coeffs.b1[v]) > tol) ++d;
        if (std::abs(coeffs.b2[v]) > tol) ++d;
    }
    return d;
}

/// Per-model Haughton BIC: -2 loglik + df * log(N / (2*pi)); smaller is
/// better. Differences of this score across two models reproduce the
/// pairwise statistic 2[l2 - l1] - (d2 - d1) log(N/(2*pi)) up to a global
/// sign flip.
inline double hbic(double loglik, int df, int N) {
    if (N < 1) throw Error("hbic: N must be at least 1");
    return -2.0 * loglik + static_cast<double>(df) * std::log(static_cast<double>(N) / (2.0 * M_PI));
}

struct ScoredModel {
    double loglik = 0.0;
    int df = 0;
    double hbic = 0.0;
};

}  // namespace xmint
