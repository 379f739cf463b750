#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgmsm {

/// Base of every error thrown by the library. The category drives the CLI
/// exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { usage, data, numeric };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::usage, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::numeric, what) {}
};

class IntegrationError : public NumericError {
 public:
  IntegrationError(std::size_t step, const std::string& what)
      : NumericError("integration failed at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class SpectralError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class LikelihoodError : public NumericError {
 public:
  LikelihoodError(std::size_t pair, const std::string& what)
      : NumericError("pair " + std::to_string(pair) + ": " + what), pair_(pair) {}
  std::size_t pair() const noexcept { return pair_; }

 private:
  std::size_t pair_;
};

class TrainingError : public NumericError {
 public:
  TrainingError(int epoch, long batch, const std::string& what)
      : NumericError("training aborted at epoch " + std::to_string(epoch) + ", batch " +
                     std::to_string(batch) + ": " + what),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  long batch() const noexcept { return batch_; }

 private:
  int epoch_;
  long batch_;
};

class OptimizerError : public NumericError {
 public:
  using NumericError::NumericError;
};

class EstimationError : public DataError {
 public:
  using DataError::DataError;
};

/// Raised when a backward pass is fed a cache whose parameters have since
/// changed.
class StaleCacheError : public Error {
 public:
  explicit StaleCacheError(const std::string& what) : Error(Category::usage, what) {}
};

}  // namespace dgmsm
