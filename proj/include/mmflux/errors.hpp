#pragma once

#include <stdexcept>
#include <string>

namespace mmflux {

/// Invalid configuration or problem specification (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Test-function support not resolved by the run's grid (CLI exit code 3).
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite state during time stepping.
struct SolverError : std::runtime_error {
    SolverError(const std::string& what, double t, std::size_t cell) : std::runtime_error(what), time(t), cell(cell) {}
    double time;
    std::size_t cell;
};

}  // namespace mmflux
