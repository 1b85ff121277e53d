#pragma once

#include <stdexcept>
#include <string>

namespace sgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-positive mass, eps_r <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration (JSON documents, grids, CLI options).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// A drive or force returned a non-finite value.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double at) : Error(what), at_(at) {}
    double at() const noexcept { return at_; }

private:
    double at_;
};

/// Quadrature refinement hit its cap before reaching the requested tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double achieved) : Error(what), achieved_(achieved) {}
    double achieved_error() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace sgp
