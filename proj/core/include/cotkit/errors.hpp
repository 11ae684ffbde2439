#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cotkit {

/// Root of every error thrown by cotkit. The CLI maps the two branches
/// below onto exit codes 1 (validation) and 2 (runtime).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration; the caller can fix it and retry.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A record file line could not be parsed.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyTraceError : public ValidationError {
public:
    EmptyTraceError() : ValidationError("reasoning trace is empty") {}
};

class BudgetTooSmallError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failures that are not the caller's fault: numerics, network, I/O.
class RuntimeError : public Error {
public:
    using Error::Error;
};

class NumericalError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class TransportError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class RemoteError : public RuntimeError {
public:
    RemoteError(int status, const std::string& message)
        : RuntimeError("remote error " + std::to_string(status) + ": " + message),
          status_(status), message_(message) {}

    int status() const noexcept { return status_; }
    const std::string& message() const noexcept { return message_; }

private:
    int status_;
    std::string message_;
};

}  // namespace cotkit
