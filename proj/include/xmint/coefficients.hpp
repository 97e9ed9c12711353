#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "xmint/dataset.hpp"
#include "xmint/error.hpp"

namespace xmint {

/// All structural coefficients of the two-equation mediation model:
///   M_i = a0 + a X_i + e1_i
///   Y_i = c0 + c X_i + M_i' b1 + (X_i * M_i') b2 + e2_i
struct CoefficientSet {
    Eigen::VectorXd a0;  // V mediator intercepts
    Eigen::VectorXd a;   // V exposure->mediator paths
    double c0 = 0.0;     // outcome intercept
    double c = 0.0;      // direct exposure->outcome effect
    Eigen::VectorXd b1;  // V mediator->outcome main effects
    Eigen::VectorXd b2;  // V exposure-by-mediator interaction effects

    static CoefficientSet zero(Eigen::Index V) {
        CoefficientSet s;
        s.a0 = Eigen::VectorXd::Zero(V);
        s.a = Eigen::VectorXd::Zero(V);
        s.b1 = Eigen::VectorXd::Zero(V);
        s.b2 = Eigen::VectorXd::Zero(V);
        return s;
    }

    Eigen::Index V() const { return a.size(); }
};

/// Nuisance parameters: outcome noise variance and mediator residual
/// precision matrix Omega = Sigma^{-1}.
struct NuisanceParams {
    double sigma2 = 1.0;
    Eigen::MatrixXd omega;  // V x V symmetric positive definite

    static NuisanceParams identity(Eigen::Index V) {
        NuisanceParams p;
        p.sigma2 = 1.0;
        p.omega = Eigen::MatrixXd::Identity(V, V);
        return p;
    }
};

/// Index sets of selected mediators and interactions. Indices are 0-based
/// column positions into M, kept sorted and duplicate-free.
struct SelectionState {
    std::vector<int> mediators;
    std::vector<int> interactions;

    bool empty() const { return mediators.empty() && interactions.empty(); }

    bool operator==(const SelectionState& o) const {
        return mediators == o.mediators && interactions == o.interactions;
    }

    bool contains_mediator(int v) const {
        return std::binary_search(mediators.begin(), mediators.end(), v);
    }
    bool contains_interaction(int v) const {
        return std::binary_search(interactions.begin(), interactions.end(), v);
    }

    /// True when every interaction index also appears among the mediators.
    bool hierarchical() const {
        return std::all_of(interactions.begin(), interactions.end(),
                           [&](int v) { return contains_mediator(v); });
    }

    /// Union of mediators and interactions as the mediator set; used to
    /// close the hierarchy on the reported final model.
    SelectionState hierarchy_closure() const {
        SelectionState out = *this;
        for (int v : interactions)
            if (!contains_mediator(v)) out.mediators.push_back(v);
        std::sort(out.mediators.begin(), out.mediators.end());
        return out;
    }
};

/// A column v is a mediator when both its a_v and b1_v survive the
/// tolerance; it carries an interaction when b2_v does. Coordinate descent
/// produces exact zeros, so tol only guards against floating noise.
inline SelectionState extract_selection(const CoefficientSet& coeffs, double tol = 1e-8) {
    SelectionState s;
    for (Eigen::Index v = 0; v < coeffs.V(); ++v) {
        if (std::abs(coeffs.a[v]) > tol && std::abs(coeffs.b1[v]) > tol)
            s.mediators.push_back(static_cast<int>(v));
        if (std::abs(coeffs.b2[v]) > tol) s.interactions.push_back(static_cast<int>(v));
    }
    return s;
}

/// Maps coefficients fitted on standardized columns back to the original
/// units recorded in `sd`. Derived by substituting x = (X - mu)/s into the
/// standardized model and collecting terms; the interaction products make
/// b2 feed back into b1, c, and the intercepts.
inline CoefficientSet destandardize_coefficients(const CoefficientSet& std_coeffs,
                                                 const StandardizedDataset& sd) {
    const Eigen::Index V = std_coeffs.V();
    if (sd.m_scales.size() != V)
        throw DimensionMismatch("destandardize_coefficients: coefficient/scale size mismatch");

    const double sx = sd.x_scale, mx = sd.x_center;
    const double sy = sd.y_scale, my = sd.y_center;
    CoefficientSet out = CoefficientSet::zero(V);

    double c0_acc = std_coeffs.c0 - std_coeffs.c * mx / sx;
    double c_acc = std_coeffs.c / sx;
    for (Eigen::Index v = 0; v < V; ++v) {
        const double sv = sd.m_scales[v], mv = sd.m_centers[v];
        out.b2[v] = sy * std_coeffs.b2[v] / (sx * sv);
        out.b1[v] = sy * (std_coeffs.b1[v] - std_coeffs.b2[v] * mx / sx) / sv;
        c_acc -= std_coeffs.b2[v] * mv / (sx * sv);
        c0_acc += -std_coeffs.b1[v] * mv / sv + std_coeffs.b2[v] * mx * mv / (sx * sv);

        out.a[v] = sv * std_coeffs.a[v] / sx;
        out.a0[v] = mv + sv * std_coeffs.a0[v] - sv * std_coeffs.a[v] * mx / sx;
    }
    out.c = sy * c_acc;
    out.c0 = my + sy * c0_acc;
    return out;
}

}  // namespace xmint
