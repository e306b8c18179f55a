#pragma once

#include <stdexcept>
#include <string>

namespace equisym {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes, arities or particle counts do not match.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// A brute-force oracle was asked to enumerate too many permutations.
class OracleSizeError : public Error {
public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. sorting with d > 1).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A polynomial does not vanish on the hyperplane of the requested linear factor.
class DivisibilityError : public Error {
public:
  DivisibilityError(int i, int j, const std::string& what)
      : Error(what), first_(i), second_(j) {}

  /// 1-based indices of the factor x_j - x_i that failed.
  int first() const { return first_; }
  int second() const { return second_; }

private:
  int first_;
  int second_;
};

/// A function declared anti-symmetric failed the spot check.
class NotAntisymmetricError : public Error {
public:
  using Error::Error;
};

/// Training diverged (NaN/inf loss).
class TrainingError : public Error {
public:
  using Error::Error;
};

} // namespace equisym
