#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fkdmc {

// CLI exit codes, one per failure class.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    config_error = 2,
    extinction = 3,
    non_convergence = 4,
    no_stable_k = 5,
    numeric_failure = 6,
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// All selection weights vanished: the absorbing well killed the ensemble.
struct ExtinctionError : std::runtime_error {
    int step;
    explicit ExtinctionError(int step_)
        : std::runtime_error("ensemble extinct at step " + std::to_string(step_) +
                             ": no walker has a finite potential"),
          step(step_) {}
};

// A kernel draw produced a non-finite coordinate.
struct PropagationError : std::runtime_error {
    int step;
    std::size_t walker;
    PropagationError(int step_, std::size_t walker_)
        : std::runtime_error("non-finite position for walker " + std::to_string(walker_) +
                             " at step " + std::to_string(step_)),
          step(step_), walker(walker_) {}
};

struct NonConvergenceError : std::runtime_error {
    double residual;
    NonConvergenceError(const std::string& ctx, double residual_)
        : std::runtime_error(ctx + ": no convergence, last residual " + std::to_string(residual_)),
          residual(residual_) {}
};

// min_stable_k exhausted k_max; carries the min-eigenvalue trace for diagnosis.
struct NoStableKError : std::runtime_error {
    std::vector<double> min_eigenvalues;
    NoStableKError(int k_max, std::vector<double> eigs)
        : std::runtime_error("no stable k found up to k_max=" + std::to_string(k_max)),
          min_eigenvalues(std::move(eigs)) {}
};

struct NonIntegrableError : std::runtime_error {
    explicit NonIntegrableError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fkdmc
