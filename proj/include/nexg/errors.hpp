#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nexg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatches, out-of-range parameters, etc.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A malformed file. `field_path()` names the offending JSON/CSV location.
class ParseError : public Error {
 public:
  ParseError(std::string field_path, const std::string& message)
      : Error(field_path.empty() ? message : field_path + ": " + message),
        path_(std::move(field_path)) {}
  const std::string& field_path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Numerical blow-up during integration.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t last_finite_index, const std::string& message)
      : Error(message), last_finite_(last_finite_index) {}
  std::size_t last_finite_index() const noexcept { return last_finite_; }

 private:
  std::size_t last_finite_;
};

/// Loss became non-finite while training.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(int last_stable_epoch, const std::string& message)
      : Error(message), last_stable_epoch_(last_stable_epoch) {}
  int last_stable_epoch() const noexcept { return last_stable_epoch_; }

 private:
  int last_stable_epoch_;
};

/// An approximator returned a (numerically) zero vector.
class DegeneratePredictionError : public Error {
 public:
  using Error::Error;
};

/// Dataset generation produced no usable tuple.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// delta <= r_eps / s: the convergence bound gives no termination guarantee.
class NoGuaranteeError : public Error {
 public:
  using Error::Error;
};

}  // namespace nexg
