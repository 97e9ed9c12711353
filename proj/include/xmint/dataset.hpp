#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "xmint/error.hpp"

namespace xmint {

/// One analysis sample: exposure X, outcome Y, and V candidate mediator
/// columns M over n subjects.
struct Dataset {
    Eigen::VectorXd X;
    Eigen::VectorXd Y;
    Eigen::MatrixXd M;                      // n x V
    std::vector<std::string> column_names;  // V labels; empty means M1..MV

    Eigen::Index n() const { return X.size(); }
    Eigen::Index V() const { return M.cols(); }

    std::string mediator_name(Eigen::Index v) const {
        if (v < static_cast<Eigen::Index>(column_names.size())) return column_names[v];
        return "M" + std::to_string(v + 1);
    }
};

namespace detail {

inline double column_mean(const Eigen::Ref<const Eigen::VectorXd>& x) { return x.mean(); }

/// Sample standard deviation with denominator n-1.
inline double column_sd(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double m = x.mean();
    const double ss = (x.array() - m).square().sum();
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace detail

/// Checks the Dataset invariants: n >= 3, V >= 1, matching shapes, all
/// entries finite, every column non-constant. Throws on violation.
inline void validate(const Dataset& d) {
    if (d.X.size() != d.Y.size() || d.X.size() != d.M.rows())
        throw DimensionMismatch("X, Y, and M must have the same number of rows");
    if (d.n() < 3) throw InvalidData("need at least 3 subjects, got " + std::to_string(d.n()));
    if (d.V() < 1) throw InvalidData("need at least one candidate mediator column");

    auto check_finite = [](const Eigen::Ref<const Eigen::VectorXd>& col, const std::string& name) {
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (!std::isfinite(col[i]))
                throw InvalidData("non-finite value in column '" + name + "', row " +
                                  std::to_string(i + 1));
    };
    check_finite(d.X, "X");
    check_finite(d.Y, "Y");
    for (Eigen::Index v = 0; v < d.V(); ++v) check_finite(d.M.col(v), d.mediator_name(v));

    if (detail::column_sd(d.X) <= 0.0) throw ZeroVarianceColumn("X");
    if (detail::column_sd(d.Y) <= 0.0) throw ZeroVarianceColumn("Y");
    for (Eigen::Index v = 0; v < d.V(); ++v)
        if (detail::column_sd(d.M.col(v)) <= 0.0) throw ZeroVarianceColumn(d.mediator_name(v));
}

/// A Dataset whose columns have been shifted/scaled to mean 0, sd 1
/// (sample sd, denominator n-1), together with the centers and scales
/// needed to map coefficients back to original units.
struct StandardizedDataset {
    Dataset data;
    double x_center = 0.0, x_scale = 1.0;
    double y_center = 0.0, y_scale = 1.0;
    Eigen::VectorXd m_centers;
    Eigen::VectorXd m_scales;
};

inline StandardizedDataset standardize(const Dataset& d) {
    validate(d);
    StandardizedDataset out;
    out.data.column_names = d.column_names;

    auto scale_col = [](const Eigen::VectorXd& col, double& center, double& scale) {
        center = detail::column_mean(col);
        scale = detail::column_sd(col);
        return Eigen::VectorXd(((col.array() - center) / scale).matrix());
    };

    out.data.X = scale_col(d.X, out.x_center, out.x_scale);
    out.data.Y = scale_col(d.Y, out.y_center, out.y_scale);
    out.m_centers.resize(d.V());
    out.m_scales.resize(d.V());
    out.data.M.resize(d.n(), d.V());
    for (Eigen::Index v = 0; v < d.V(); ++v) {
        out.m_centers[v] = detail::column_mean(d.M.col(v));
        out.m_scales[v] = detail::column_sd(d.M.col(v));
        out.data.M.col(v) = (d.M.col(v).array() - out.m_centers[v]) / out.m_scales[v];
    }
    return out;
}

/// Maps a standardized dataset back to original units.
inline Dataset destandardize(const StandardizedDataset& sd) {
    Dataset out;
    out.column_names = sd.data.column_names;
    out.X = sd.data.X * sd.x_scale + Eigen::VectorXd::Constant(sd.data.n(), sd.x_center);
    out.Y = sd.data.Y * sd.y_scale + Eigen::VectorXd::Constant(sd.data.n(), sd.y_center);
    out.M.resize(sd.data.n(), sd.data.V());
    for (Eigen::Index v = 0; v < sd.data.V(); ++v)
        out.M.col(v) = sd.data.M.col(v).array() * sd.m_scales[v] + sd.m_centers[v];
    return out;
}

/// Entry (i, v) = X_i * M_{i,v}. The products are formed from already
/// standardized X and M and are deliberately not re-standardized, so the
/// penalty scale over [X M X*M] stays on a single footing.
inline Eigen::MatrixXd interaction_columns(const Eigen::Ref<const Eigen::VectorXd>& X,
                                           const Eigen::Ref<const Eigen::MatrixXd>& M) {
    if (X.size() != M.rows())
        throw DimensionMismatch("interaction_columns: X has " + std::to_string(X.size()) +
                                " rows but M has " + std::to_string(M.rows()));
    return M.array().colwise() * X.array();
}

}  // namespace xmint
