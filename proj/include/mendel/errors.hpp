// errors.hpp — exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace mendel {

// Thrown when an operation needs a nonzero population (total below 1e-300
// counts as zero to avoid overflow in ratios).
struct ZeroPopulationError : std::domain_error {
    explicit ZeroPopulationError(const std::string& what)
        : std::domain_error(what) {}
};

// Scalar solver failed to bracket or converge.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what)
        : std::runtime_error(what) {}
};

// Operation requires a selectively neutral model.
struct NeutralityError : std::invalid_argument {
    explicit NeutralityError(const std::string& what)
        : std::invalid_argument(what) {}
};

// Model does not satisfy a required structural assumption.
struct AssumptionError : std::invalid_argument {
    explicit AssumptionError(const std::string& what)
        : std::invalid_argument(what) {}
};

// Integration produced a non-finite state or an unrecoverable step size.
struct IntegrationError : std::runtime_error {
    explicit IntegrationError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace mendel
