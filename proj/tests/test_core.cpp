#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "xmint/coefficients.hpp"
#include "xmint/dataset.hpp"
#include "xmint/rng.hpp"

namespace {

xmint::Dataset small_dataset() {
    xmint::Dataset d;
    d.X.resize(5);
    d.X << 1.0, 2.0, -0.5, 0.3, 1.7;
    d.Y.resize(5);
    d.Y << 0.2, -1.1, 0.7, 2.0, -0.4;
    d.M.resize(5, 2);
    d.M << 1.0, -2.0, 0.5, 0.1, -1.2, 0.9, 2.2, -0.3, 0.4, 1.5;
    return d;
}

xmint::Dataset random_dataset(int n, int V, std::uint64_t seed) {
    xmint::NormalSampler rng(seed);
    xmint::Dataset d;
    d.X.resize(n);
    d.Y.resize(n);
    d.M.resize(n, V);
    for (int i = 0; i < n; ++i) d.X[i] = 2.0 * rng.normal() + 1.0;
    for (int i = 0; i < n; ++i) d.Y[i] = 0.5 * rng.normal() - 3.0;
    for (int v = 0; v < V; ++v)
        for (int i = 0; i < n; ++i) d.M(i, v) = 1.5 * rng.normal() + 0.2 * v;
    return d;
}

}  // namespace

TEST_CASE("NormalSampler is deterministic given a seed") {
    xmint::NormalSampler a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const double xa = a.normal(), xb = b.normal(), xc = c.normal();
        all_equal = all_equal && (xa == xb);
        any_diff = any_diff || (xa != xc);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("NormalSampler draws have standard-normal moments") {
    xmint::NormalSampler rng(7);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
        sumcube += x * x * x;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.02);
    CHECK(std::abs(sumcube / n) < 0.05);
}

TEST_CASE("validate accepts a well-formed dataset") {
    CHECK_NOTHROW(xmint::validate(small_dataset()));
}

TEST_CASE("validate rejects bad shapes and sizes") {
    auto d = small_dataset();
    d.Y.conservativeResize(4);
    CHECK_THROWS_AS(xmint::validate(d), xmint::DimensionMismatch);

    xmint::Dataset tiny;
    tiny.X.resize(2);
    tiny.X << 0.0, 1.0;
    tiny.Y = tiny.X;
    tiny.M.resize(2, 1);
    tiny.M << 1.0, 2.0;
    CHECK_THROWS_AS(xmint::validate(tiny), xmint::InvalidData);

    auto no_med = small_dataset();
    no_med.M.resize(5, 0);
    CHECK_THROWS_AS(xmint::validate(no_med), xmint::InvalidData);
}

TEST_CASE("validate names the column and row of a non-finite entry") {
    auto d = small_dataset();
    d.M(2, 1) = std::nan("");
    try {
        xmint::validate(d);
        FAIL("expected InvalidData");
    } catch (const xmint::InvalidData& e) {
        const std::string msg = e.what();
        CHECK(msg.find("M2") != std::string::npos);
        CHECK(msg.find("row 3") != std::string::npos);
    }

    auto dx = small_dataset();
    dx.X[0] = std::numeric_limits<double>::infinity();
    try {
        xmint::validate(dx);
        FAIL("expected InvalidData");
    } catch (const xmint::InvalidData& e) {
        CHECK(std::string(e.what()).find("'X'") != std::string::npos);
    }
}

TEST_CASE("validate reports constant columns by name") {
    auto d = small_dataset();
    d.M.col(0).setConstant(3.0);
    try {
        xmint::validate(d);
        FAIL("expected ZeroVarianceColumn");
    } catch (const xmint::ZeroVarianceColumn& e) {
        CHECK(e.column() == "M1");
    }

    auto named = small_dataset();
    named.column_names = {"hippocampus", "amygdala"};
    named.M.col(1).setConstant(-1.0);
    try {
        xmint::validate(named);
        FAIL("expected ZeroVarianceColumn");
    } catch (const xmint::ZeroVarianceColumn& e) {
        CHECK(e.column() == "amygdala");
    }

    auto dx = small_dataset();
    dx.X.setZero();
    CHECK_THROWS_AS(xmint::validate(dx), xmint::ZeroVarianceColumn);
}

TEST_CASE("standardize maps (1,2,3) to (-1,0,1)") {
    xmint::Dataset d;
    d.X.resize(3);
    d.X << 1.0, 2.0, 3.0;
    d.Y.resize(3);
    d.Y << 4.0, -1.0, 2.5;
    d.M.resize(3, 1);
    d.M << 10.0, 30.0, 20.0;
    const auto sd = xmint::standardize(d);
    CHECK(sd.data.X[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(sd.data.X[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(sd.data.X[2] == Catch::Approx(1.0).margin(1e-12));
    CHECK(sd.x_center == Catch::Approx(2.0));
    CHECK(sd.x_scale == Catch::Approx(1.0));
}

TEST_CASE("standardize leaves an already standardized column unchanged") {
    auto d = random_dataset(40, 3, 11);
    auto sd = xmint::standardize(d);
    auto sd2 = xmint::standardize(sd.data);
    CHECK((sd2.data.X - sd.data.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sd2.data.Y - sd.data.Y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sd2.data.M - sd.data.M).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize: random 50x10 matrix has exact moments, recomputed directly") {
    auto d = random_dataset(50, 10, 99);
    const auto sd = xmint::standardize(d);

    auto check_col = [&](const Eigen::VectorXd& col) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) s += col[i];
        const double mean = s / static_cast<double>(col.size());
        double ss = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) ss += (col[i] - mean) * (col[i] - mean);
        const double sd_hat = std::sqrt(ss / static_cast<double>(col.size() - 1));
        CHECK(std::abs(mean) <= 1e-10);
        CHECK(std::abs(sd_hat - 1.0) <= 1e-8);
    };
    check_col(sd.data.X);
    check_col(sd.data.Y);
    for (int v = 0; v < 10; ++v) check_col(sd.data.M.col(v));
}

TEST_CASE("standardize round trip reproduces the original data") {
    auto d = random_dataset(30, 4, 5);
    const auto back = xmint::destandardize(xmint::standardize(d));
    CHECK((back.X - d.X).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.Y - d.Y).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.M - d.M).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("standardize is idempotent") {
    auto d = random_dataset(25, 3, 8);
    const auto once = xmint::standardize(d);
    const auto twice = xmint::standardize(once.data);
    CHECK((twice.data.X - once.data.X).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((twice.data.M - once.data.M).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("interaction_columns special cases") {
    Eigen::MatrixXd M(2, 2);
    M << 3.0, 1.0, 4.0, -2.0;

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK(xmint::interaction_columns(zero, M).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    CHECK((xmint::interaction_columns(ones, M) - M).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd x(2);
    x << 2.0, -1.0;
    const Eigen::MatrixXd XM = xmint::interaction_columns(x, M);
    CHECK(XM(0, 0) == 6.0);
    CHECK(XM(1, 0) == -4.0);
    CHECK(XM(0, 1) == 2.0);
    CHECK(XM(1, 1) == 2.0);
}

TEST_CASE("interaction_columns is linear in X") {
    auto d = random_dataset(20, 3, 17);
    const Eigen::MatrixXd base = xmint::interaction_columns(d.X, d.M);
    const Eigen::MatrixXd scaled = xmint::interaction_columns((2.5 * d.X).eval(), d.M);
    CHECK((scaled - 2.5 * base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interaction_columns rejects mismatched shapes") {
    Eigen::VectorXd x(3);
    x.setOnes();
    Eigen::MatrixXd M(4, 2);
    M.setOnes();
    CHECK_THROWS_AS(xmint::interaction_columns(x, M), xmint::DimensionMismatch);
}

TEST_CASE("extract_selection applies the nonzero-pair rule") {
    auto zero = xmint::CoefficientSet::zero(3);
    CHECK(xmint::extract_selection(zero).empty());

    auto coeffs = xmint::CoefficientSet::zero(3);
    coeffs.a << 1.0, 0.0, 1.0;
    coeffs.b1 << 1.0, 1.0, 0.0;
    coeffs.b2 << 0.0, 0.0, 0.5;
    const auto s = xmint::extract_selection(coeffs);
    CHECK(s.mediators == std::vector<int>{0});
    CHECK(s.interactions == std::vector<int>{2});
}

TEST_CASE("extract_selection boundary: 5e-9 is below the 1e-8 tolerance") {
    auto coeffs = xmint::CoefficientSet::zero(1);
    coeffs.a << 5e-9;
    coeffs.b1 << 1.0;
    CHECK(xmint::extract_selection(coeffs, 1e-8).mediators.empty());
    CHECK(xmint::extract_selection(coeffs, 1e-9).mediators == std::vector<int>{0});
}

TEST_CASE("extract_selection is monotone in tol") {
    xmint::NormalSampler rng(3);
    auto coeffs = xmint::CoefficientSet::zero(20);
    for (int v = 0; v < 20; ++v) {
        coeffs.a[v] = 0.3 * rng.normal();
        coeffs.b1[v] = 0.3 * rng.normal();
        coeffs.b2[v] = 0.3 * rng.normal();
    }
    auto contains_all = [](const std::vector<int>& big, const std::vector<int>& small) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    };
    auto prev = xmint::extract_selection(coeffs, 1e-8);
    for (double tol : {1e-4, 1e-2, 0.1, 0.3, 0.6}) {
        const auto cur = xmint::extract_selection(coeffs, tol);
        CHECK(contains_all(prev.mediators, cur.mediators));
        CHECK(contains_all(prev.interactions, cur.interactions));
        prev = cur;
    }
}

TEST_CASE("SelectionState hierarchy helpers") {
    xmint::SelectionState s;
    s.mediators = {0, 2, 4};
    s.interactions = {2};
    CHECK(s.hierarchical());
    CHECK(s.contains_mediator(2));
    CHECK_FALSE(s.contains_mediator(1));

    s.interactions = {1, 2};
    CHECK_FALSE(s.hierarchical());
    const auto closed = s.hierarchy_closure();
    CHECK(closed.mediators == std::vector<int>{0, 1, 2, 4});
    CHECK(closed.interactions == std::vector<int>{1, 2});
    CHECK(closed.hierarchical());
}

TEST_CASE("destandardize_coefficients preserves fitted values in original units") {
    auto d = random_dataset(35, 4, 21);
    const auto sd = xmint::standardize(d);

    xmint::NormalSampler rng(55);
    auto coeffs = xmint::CoefficientSet::zero(4);
    coeffs.c0 = rng.normal();
    coeffs.c = rng.normal();
    for (int v = 0; v < 4; ++v) {
        coeffs.a0[v] = rng.normal();
        coeffs.a[v] = rng.normal();
        coeffs.b1[v] = rng.normal();
        coeffs.b2[v] = rng.normal();
    }

    const auto raw = xmint::destandardize_coefficients(coeffs, sd);

    const Eigen::MatrixXd XMs = xmint::interaction_columns(sd.data.X, sd.data.M);
    const Eigen::VectorXd yhat_std = Eigen::VectorXd::Constant(35, coeffs.c0) +
                                     coeffs.c * sd.data.X + sd.data.M * coeffs.b1 +
                                     XMs * coeffs.b2;
    const Eigen::VectorXd yhat_from_std = sd.y_center + (sd.y_scale * yhat_std).array();

    const Eigen::MatrixXd XMr = xmint::interaction_columns(d.X, d.M);
    const Eigen::VectorXd yhat_raw = Eigen::VectorXd::Constant(35, raw.c0) + raw.c * d.X +
                                     d.M * raw.b1 + XMr * raw.b2;
    CHECK((yhat_raw - yhat_from_std).cwiseAbs().maxCoeff() < 1e-10);

    for (int v = 0; v < 4; ++v) {
        const Eigen::VectorXd mhat_std =
            Eigen::VectorXd::Constant(35, coeffs.a0[v]) + coeffs.a[v] * sd.data.X;
        const Eigen::VectorXd mhat_from_std =
            sd.m_centers[v] + (sd.m_scales[v] * mhat_std).array();
        const Eigen::VectorXd mhat_raw = Eigen::VectorXd::Constant(35, raw.a0[v]) + raw.a[v] * d.X;
        CHECK((mhat_raw - mhat_from_std).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("destandardize_coefficients checks dimensions") {
    auto d = random_dataset(10, 2, 1);
    const auto sd = xmint::standardize(d);
    const auto coeffs = xmint::CoefficientSet::zero(3);
    CHECK_THROWS_AS(xmint::destandardize_coefficients(coeffs, sd), xmint::DimensionMismatch);
}
