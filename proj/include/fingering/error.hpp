#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fingering {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad parameter, mismatched grids, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative linear solve hit its iteration cap before reaching tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history)
        : Error(what), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// A runtime invariant (maximum principle, mass law, CFL, incompressibility) failed.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Configuration document rejected; carries every problem found, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

}  // namespace fingering
