#pragma once

#include <stdexcept>
#include <string>

namespace hisd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An energy, gradient or Hessian action produced a non-finite value, or was
/// called with arguments outside its domain.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A direction to be normalized lies (numerically) in the span of the vectors
/// it is orthogonalized against. `index()` is 1-based within the frame being
/// built, or 0 when not applicable.
class DegenerateDirectionError : public Error {
 public:
  explicit DegenerateDirectionError(const std::string& what, int index = 0)
      : Error(what), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// The iteration left the region where the dynamics are meaningful.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration. `field()` names the offending entry when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace hisd
