#pragma once

#include <stdexcept>
#include <string>

namespace optexec {

/// Base for every failure raised by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain_error"; }
};

class UnboundedTransformError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "unbounded_transform"; }
};

class SingularCurvatureError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "singular_curvature"; }
};

class ApplicabilityError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "applicability"; }
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double last_residual, int iterations)
        : Error(what), last_residual_(last_residual), iterations_(iterations) {}
    const char* kind() const noexcept override { return "non_convergence"; }
    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

class NoSolutionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "no_solution"; }
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "out_of_range"; }
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {})
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line), field_(std::move(field)) {}
    const char* kind() const noexcept override { return "config_error"; }
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

}  // namespace optexec
