#pragma once

#include <stdexcept>
#include <string>

namespace iwcv {

/// Base of every error thrown by the library. The C API maps each subclass
/// onto one of the IWCV_ERROR_* codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed a value outside an operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration, including preprocessing that leaves no
/// features behind.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Data that a method cannot work with, e.g. zero spread or a singular
/// fitted covariance.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// The shifted normal equations (X'X + lambda I) are singular or indefinite.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double lambda)
        : Error(what), lambda_(lambda) {}
    double lambda() const noexcept { return lambda_; }

private:
    double lambda_;
};

/// An iterative estimator did not converge or produced no usable result.
class EstimationError : public Error {
public:
    EstimationError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Every lambda on the grid was infeasible.
class SelectionError : public Error {
public:
    using Error::Error;
};

}  // namespace iwcv
