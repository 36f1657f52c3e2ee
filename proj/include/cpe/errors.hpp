/// @file errors.hpp
/// @brief Exception types shared by the solver, diagnostics and I/O layers.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class UnsupportedAxis : public Error {
 public:
  using Error::Error;
};

class DensityNonPositive : public Error {
 public:
  DensityNonPositive(double min_value, double floor)
      : Error("density minimum " + std::to_string(min_value) +
              " is at or below the floor " + std::to_string(floor)),
        min_value_(min_value) {}
  double min_value() const { return min_value_; }

 private:
  double min_value_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double residual)
      : Error("conjugate gradient did not converge after " +
              std::to_string(iterations) + " iterations (residual " +
              std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class PicardDiverged : public Error {
 public:
  PicardDiverged(int iterations, double change)
      : Error("Picard iteration did not converge after " +
              std::to_string(iterations) + " iterations (relative change " +
              std::to_string(change) + ")") {}
};

class CFLViolation : public Error {
 public:
  using Error::Error;
};

class HeightMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& reason)
      : Error(key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IOError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public Error {
 public:
  using Error::Error;
};

class VersionUnsupported : public Error {
 public:
  using Error::Error;
};

class ChecksumMismatch : public Error {
 public:
  using Error::Error;
};

/// Wraps a stepper failure with the index of the step that raised it.
class StepError : public Error {
 public:
  StepError(long step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace cpe
