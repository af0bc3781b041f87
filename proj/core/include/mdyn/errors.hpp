#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad parameter, bad shape).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input is too short for the requested memory depth or index.
class LengthError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A linear system is singular or too ill-conditioned to solve.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Requested rank exceeds the numerical rank of the data.
class RankError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// An internal consistency identity failed (e.g. TBH reality condition).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written, or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

/// A trajectory left the finite / bounded region.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step, Eigen::VectorXd last_finite_state)
        : Error(what), step_(step), last_state_(std::move(last_finite_state)) {}

    /// Macro step index at which the state stopped being acceptable.
    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] const Eigen::VectorXd& last_finite_state() const noexcept { return last_state_; }

private:
    std::size_t step_;
    Eigen::VectorXd last_state_;
};

}  // namespace mdyn
