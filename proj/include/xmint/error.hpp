#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xmint {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data cannot be used (non-finite cells, bad shape, too few rows).
class InvalidData : public Error {
public:
    using Error::Error;
};

/// A column is constant and cannot be scaled to unit variance.
class ZeroVarianceColumn : public InvalidData {
public:
    explicit ZeroVarianceColumn(std::string column)
        : InvalidData("column '" + column + "' has zero variance"), column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Coordinate descent hit its iteration cap before meeting the tolerance.
/// Carries the last iterate so callers can inspect how far the solve got.
class NonConvergence : public Error {
public:
    NonConvergence(std::string what, std::vector<double> last_iterate, int sweeps)
        : Error(std::move(what)), last_iterate_(std::move(last_iterate)), sweeps_(sweeps) {}
    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    int sweeps() const noexcept { return sweeps_; }

private:
    std::vector<double> last_iterate_;
    int sweeps_;
};

class NonPositiveSigma2 : public Error {
public:
    using Error::Error;
};

class OmegaNotPD : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// All columns are orthogonal to the outcome; no penalty scale exists.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// The lambda enlargement loop could not reach a null starting model.
class EnlargementExhausted : public Error {
public:
    using Error::Error;
};

class InvalidTruth : public Error {
public:
    using Error::Error;
};

}  // namespace xmint
