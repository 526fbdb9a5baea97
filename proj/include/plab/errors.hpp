#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plab {

// Root of every error the library throws. Callers that only need to report
// failures can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors caused by bad input (arguments, configs, files). The CLI exits 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Errors raised while a valid computation runs (divergence, collisions). The
// CLI exits 3.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

class NameError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ArgError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SpecError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The residual needs more segments than the original target, contradicting
// the Lipschitz-reduction assumption.
class AssumptionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EvalError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class CapError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class DivergedError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class TrainError : public RuntimeFailure {
 public:
  TrainError(const std::string& what, std::size_t epoch)
      : RuntimeFailure(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

class CollisionError : public RuntimeFailure {
 public:
  explicit CollisionError(std::size_t step)
      : RuntimeFailure("gap collapsed to <= 0 at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// CSV ingestion errors carry the offending column or 1-based data row.
class SchemaError : public ValidationError {
 public:
  explicit SchemaError(std::string column)
      : ValidationError("missing or unexpected column '" + column + "'"), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class SamplingError : public ValidationError {
 public:
  SamplingError(const std::string& what, std::size_t row)
      : ValidationError(what + " at row " + std::to_string(row)), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ValueError : public ValidationError {
 public:
  ValueError(const std::string& what, std::size_t row)
      : ValidationError(what + " at row " + std::to_string(row)), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ConfigParseError : public ValidationError {
 public:
  ConfigParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownKeyError : public ValidationError {
 public:
  explicit UnknownKeyError(std::string key_path)
      : ValidationError("unknown config key '" + key_path + "'"), key_(std::move(key_path)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace plab
