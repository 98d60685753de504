#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace bilevel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition of an operation was not met by the caller.
class ContractViolation : public Error {
public:
    using Error::Error;
};

class DegenerateHalfspaceError : public Error {
public:
    using Error::Error;
};

/// A feasible region that should be nonempty turned out to be empty.
class InfeasibleRegionError : public Error {
public:
    InfeasibleRegionError(std::string what, std::size_t k = 0, double g_at_y = 0.0, double level = 0.0)
        : Error(std::move(what)), iteration(k), lower_value_at_anchor(g_at_y), level(level) {}

    std::size_t iteration;
    double lower_value_at_anchor;
    double level;
};

/// Iterative routine exhausted its budget. Carries the last iterate.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(std::string what, Vector last, double residual)
        : Error(std::move(what)), last_iterate(std::move(last)), residual(residual) {}

    Vector last_iterate;
    double residual;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(std::string what, std::size_t k) : Error(std::move(what)), iteration(k) {}

    std::size_t iteration;
};

/// Stationary anchor point whose value sits above the cut level.
class DegenerateCutError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. `key_path` names the offending entry, e.g. `solvers[0].r`.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_path(std::move(key)) {}

    std::string key_path;
};

/// Requested combination of nonsmooth terms has no shipped prox.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string what, std::size_t line) : Error(std::move(what)), line(line) {}

    std::size_t line;
};

}  // namespace bilevel
