#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "equisym/permutation.hpp"
#include "equisym/polynomial.hpp"

namespace equisym {

/// n x n matrix with entry (j, i) = phi_i(x_j | x_{!=j}): rows are particles,
/// columns are orbital functions.
using GsdMatrix = Eigen::MatrixXd;

/// prod_{j<i} (x_i - x_j) over the entries of x.
template <typename Derived>
typename Derived::Scalar vandermonde(const Eigen::MatrixBase<Derived>& x) {
  typename Derived::Scalar prod(1);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) prod *= x(i) - x(j);
  return prod;
}

/// Determinant through LU with partial pivoting.
template <typename Derived>
typename Derived::Scalar slater_det(const Eigen::MatrixBase<Derived>& M) {
  if (M.rows() != M.cols()) throw ShapeError("slater_det: matrix is not square");
  if (M.rows() == 0) return typename Derived::Scalar(1);
  return M.partialPivLu().determinant();
}

/// Determinant by cofactor expansion; exact structure, O(n!) work. n <= 6.
double cofactor_det(const Eigen::MatrixXd& M);

struct DetGradient {
  double det = 0.0;
  Eigen::MatrixXd gradient;  ///< d det / d M = adj(M)^T
  double condition = 1.0;
  enum class Method { LuInverse, Cofactor, SvdAdjugate } method = Method::LuInverse;
};

/// Condition number above which the inverse-based gradient is abandoned.
inline constexpr double kDetGradientMaxCondition = 1e12;

/// d det(M) / dM. Uses det * M^{-T} from the LU factors when M is well
/// conditioned; otherwise cofactors (n <= 4) or the SVD form of the adjugate,
/// both of which stay finite on singular matrices.
DetGradient det_gradient(const Eigen::MatrixXd& M);

/// An anti-symmetric function psi of a d x n configuration.
class AsFunction {
public:
  enum class Kind { OraclePoly, Callable };

  /// Takes an anti-symmetric polynomial. For d = 1 the symmetric quotient
  /// psi / Delta is computed once here.
  static AsFunction from_polynomial(SparsePolynomial psi);
  static AsFunction from_callable(int n, int d, ScalarFunction psi);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int d() const { return d_; }
  double operator()(const ParticleConfig& X) const;

  const SparsePolynomial* polynomial() const { return poly_ ? &*poly_ : nullptr; }
  /// psi / Delta as a polynomial (d = 1 polynomials only).
  const SparsePolynomial* chi() const { return chi_ ? &*chi_ : nullptr; }

  /// chi(X) = psi(X) / Delta(X), exact polynomial quotient when available.
  double chi_value(const ParticleConfig& X) const;

private:
  AsFunction() = default;
  void spot_check() const;

  Kind kind_ = Kind::Callable;
  int n_ = 0;
  int d_ = 1;
  std::optional<SparsePolynomial> poly_;
  std::optional<SparsePolynomial> chi_;
  ScalarFunction fn_;
};

/// Exact psi / prod_{j<i}(x_i - x_j) for an anti-symmetric d = 1 polynomial.
/// Factors are removed in the order (1,2), (1,3), ..., (n-1,n).
SparsePolynomial chi_from_psi_poly(const SparsePolynomial& psi);

/// Coincidence threshold 1e-6 (1 + |X|_inf) used by chi_from_psi_numeric.
double coincidence_tolerance(const ParticleConfig& X);

/// psi / Delta for a callable psi, d = 1. Each factor (x_j - x_i) is divided
/// out in turn; where |x_j - x_i| is below the coincidence tolerance the
/// division is replaced by the central difference d/dx_j of the previous
/// stage, which is its limit.
double chi_from_psi_numeric(const ScalarFunction& psi, const ParticleConfig& X);

/// d = 1 generalized Slater matrix: column 1 is chi(X), column i is x_j^{i-1}.
GsdMatrix gsd_build_1d(const AsFunction& psi, const ParticleConfig& X);

/// Stable lexicographic sort of the particles: x_{p(1)} <= ... <= x_{p(n)}.
Permutation lex_sort_perm(const ParticleConfig& X);

enum class SignMode {
  FirstColumn,  ///< phi_1 = psi(sorted X), other nonzero entries 1
  NthRoot       ///< phi_1 = sign(psi)|psi|^{1/n}, others |psi|^{1/n}
};

/// Permuted-diagonal Slater matrix for any d: column i is nonzero only in row
/// p(i) where p = lex_sort_perm(X). Discontinuous in X for d > 1.
GsdMatrix gsd_build_nd(const AsFunction& psi, const ParticleConfig& X, SignMode mode = SignMode::FirstColumn);

/// Continuous n = 2 construction, any d: phi_1 = psi, phi_2 = 1/2.
GsdMatrix n2_continuous_gsd(const AsFunction& psi, const ParticleConfig& X);

/// Delta times a random symmetric integer polynomial of degree <= sym_degree
/// (d = 1). Built from `monomials` random monomials symmetrized by orbit sum.
SparsePolynomial random_as_polynomial(int n, int sym_degree, std::mt19937_64& rng, int monomials = 2);

/// A random smooth (tanh ridge) function of all n*d coordinates.
ScalarFunction random_smooth_function(int n, int d, std::mt19937_64& rng, int ridges = 3);

/// Oracle anti-symmetrization of f as an AsFunction (n! evaluations per call).
AsFunction oracle_antisymmetrized(int n, int d, ScalarFunction f);

} // namespace equisym
