#pragma once

#include <stdexcept>
#include <string>

namespace fracell {

/// Invalid configuration, mismatched grids, out-of-range parameters.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: zero pivot, non-convergence, indefinite quadratic form.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fracell
