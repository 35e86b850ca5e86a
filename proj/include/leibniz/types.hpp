#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace leibniz
{
using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dimensions of two operands disagree.
class DimensionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// An enumeration (pieces, selectors, shock paths, active sets) exceeded its cap.
class CapacityError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A subdifferential was requested in strict mode but the calculus could only
/// produce an outer estimate.
class InexactError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A hypothesis needed by an operation does not hold for the given data.
class InapplicableError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency assertion failed (e.g. a representation identity that
/// must hold exactly did not).
class ConsistencyError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Axis-aligned box [lower, upper].
struct Box
{
    Vector lower;
    Vector upper;

    [[nodiscard]] Eigen::Index dim() const { return lower.size(); }
};

inline void require_dim(Eigen::Index expected, Eigen::Index actual, const char* what)
{
    if (expected != actual)
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(actual));
}

} // namespace leibniz
