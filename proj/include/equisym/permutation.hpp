#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "equisym/errors.hpp"

namespace equisym {

template <typename Scalar>
using Particles = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// d x n matrix; column i holds the coordinates of particle i.
using ParticleConfig = Particles<double>;

/// Largest n for which the n! oracles will run.
inline constexpr int kMaxOracleN = 10;

/// Throws ShapeError unless X is non-empty and every entry is finite.
void check_config(const ParticleConfig& X);

/// A bijection on {0, ..., n-1}.
///
/// Stored 0-based. In documentation and text output particles are numbered
/// from 1, so `Permutation::from_one_based({2, 1})` is the transposition of
/// the first two particles.
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int n);
  static Permutation from_one_based(const std::vector<int>& images);

  int size() const { return static_cast<int>(images_.size()); }
  int operator[](int i) const { return images_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& images() const { return images_; }
  std::vector<int> one_based() const;

  Permutation inverse() const;

  /// +1 for even, -1 for odd, from the cycle decomposition.
  int parity() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

private:
  std::vector<int> images_;
};

/// (p o q)(i) = p(q(i)).
Permutation compose(const Permutation& p, const Permutation& q);

inline int parity(const Permutation& p) { return p.parity(); }

/// All n! permutations in lexicographic order of their images.
std::vector<Permutation> enumerate(int n);

/// Calls fn(p) for every permutation in lexicographic order, without
/// materialising the list.
template <typename Fn>
void for_each_permutation(int n, Fn&& fn) {
  if (n < 1) throw ShapeError("for_each_permutation: n must be >= 1");
  if (n > kMaxOracleN)
    throw OracleSizeError("permutation oracle limited to n <= 10, got n = " + std::to_string(n));
  std::vector<int> images(static_cast<std::size_t>(n));
  std::iota(images.begin(), images.end(), 0);
  do {
    fn(Permutation(images));
  } while (std::next_permutation(images.begin(), images.end()));
}

/// Column i of the result is column p(i) of X; whole particles move, never
/// individual coordinates.
template <typename Derived>
Particles<typename Derived::Scalar> apply(const Permutation& p, const Eigen::MatrixBase<Derived>& X) {
  if (p.size() != X.cols())
    throw ShapeError("apply: permutation of size " + std::to_string(p.size()) + " on " +
                     std::to_string(X.cols()) + " particles");
  Particles<typename Derived::Scalar> out(X.rows(), X.cols());
  for (int i = 0; i < p.size(); ++i) out.col(i) = X.col(p[i]);
  return out;
}

using ScalarFunction = std::function<double(const ParticleConfig&)>;

/// Sum of values in ascending order with Neumaier compensation. Sorting makes
/// the result independent of the order the values were produced in.
double ordered_sum(std::vector<double> values);

/// (1/n!) sum over all p of f(apply(p, X)).
double symmetrize(const ScalarFunction& f, const ParticleConfig& X);

/// (1/n!) sum over all p of parity(p) f(apply(p, X)).
double antisymmetrize(const ScalarFunction& f, const ParticleConfig& X);

} // namespace equisym
