#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmap {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together, or exceed the configured maximum.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A state has an eigenvalue below the positivity floor.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// Relative entropy D(a||b) is infinite: a has weight outside the support of b.
class SupportError : public Error {
public:
    using Error::Error;
};

/// Result of an engine computation failed its own post-condition.
class IntegrityError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Trajectory enumeration would exceed the record budget.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::size_t requested)
        : Error(what), requested_(requested) {}
    std::size_t requested() const noexcept { return requested_; }

private:
    std::size_t requested_;
};

/// Relaxation maps of a cycle did not bring the system back to the Gibbs state.
class CycleIncompleteError : public Error {
public:
    CycleIncompleteError(const std::string& what, double achieved_distance)
        : Error(what), achieved_distance_(achieved_distance) {}
    double achieved_distance() const noexcept { return achieved_distance_; }

private:
    double achieved_distance_;
};

/// Integration step does not resolve the fastest scale of the generator.
class StepSizeError : public Error {
public:
    using Error::Error;
};

}  // namespace qmap
