#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lnsev {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or out-of-range input data.
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t index = npos)
        : Error(what), index_(index) {}
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best, double bound)
        : Error(what), best_(best), bound_(bound) {}
    double best_estimate() const noexcept { return best_; }
    double error_bound() const noexcept { return bound_; }

private:
    double best_;
    double bound_;
};

class NoSolutionError : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    using Error::Error;
};

// Sample cannot support the requested estimator.
class EstimationError : public Error {
public:
    using Error::Error;
};

// Moment ratio outside (1, 2): the likelihood has no interior maximum.
class NoMleError : public EstimationError {
public:
    NoMleError(const std::string& what, double delta)
        : EstimationError(what), delta_(delta) {}
    double delta() const noexcept { return delta_; }

private:
    double delta_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad study configuration; line() is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lnsev
