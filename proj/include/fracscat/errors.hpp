#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fracscat {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Malformed or inconsistent configuration; `field()` is the offending key path.
class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// Bad magic, truncated payload, NaN sample, header/record mismatch.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure; `module()` names the component that raised it.
class NumericError : public Error {
  public:
    NumericError(std::string module, const std::string& what)
        : Error("[" + module + "] " + what), module_(std::move(module)) {}
    const std::string& module() const { return module_; }

  private:
    std::string module_;
};

class NonConvergence : public NumericError {
  public:
    NonConvergence(std::string module, const std::string& what, double achieved)
        : NumericError(std::move(module), what + " (achieved error estimate " + format(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const { return achieved_; }

  private:
    double achieved_;

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }
};

class ResolutionError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Singular or numerically singular Lippmann-Schwinger system. Usually means
/// k^{2s} sits at (or very near) an eigenvalue of (-Delta)^s - V.
class InteriorEigenvalue : public NumericError {
  public:
    using NumericError::NumericError;
};

class ResidualTooLarge : public NumericError {
  public:
    using NumericError::NumericError;
};

class CoverageError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// A lattice frequency lies on the shell |xi| = k with no absorption.
class ShellHit : public NumericError {
  public:
    using NumericError::NumericError;
};

class PointInsideSupport : public DomainError {
  public:
    using DomainError::DomainError;
};

} // namespace fracscat
