#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftscan {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, bad input files, unsupported kernel/parameter choices.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Failures that happen while computing: blow-ups, degenerate paths, solver failures.
class NumericalError : public Error {
public:
  using Error::Error;
};

class InvalidDriftError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class DomainError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class UnsupportedError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class NonDifferentiableKernelError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class PlacementError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
public:
  ParseError(const std::string& what, std::size_t line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class BlowUpError : public NumericalError {
public:
  explicit BlowUpError(std::size_t step)
      : NumericalError("non-finite state at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class DegeneratePathError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NoFixedPointError : public NumericalError {
public:
  NoFixedPointError(double w_lo, double g_lo, double w_hi, double g_hi)
      : NumericalError("no sign change of g on [" + std::to_string(w_lo) + ", " +
                       std::to_string(w_hi) + "]: g(lo)=" + std::to_string(g_lo) +
                       ", g(hi)=" + std::to_string(g_hi)),
        g_lo_(g_lo), g_hi_(g_hi) {}
  double g_lo() const noexcept { return g_lo_; }
  double g_hi() const noexcept { return g_hi_; }

private:
  double g_lo_;
  double g_hi_;
};

}  // namespace driftscan
