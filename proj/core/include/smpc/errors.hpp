#pragma once

#include <stdexcept>
#include <string>

namespace smpc {

/// Malformed or inconsistent input data (dimensions, covariances, config files).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of a function (e.g. erf_inv(1)).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Riccati iteration failed to converge or produced a non-stabilizing gain.
class SynthesisError : public std::runtime_error {
public:
    SynthesisError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// The closed loop could not obtain a usable input from the QP solver.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smpc
