#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equisym/permutation.hpp"
#include "equisym/polynomial.hpp"

namespace equisym {

enum class BasisFamily { PolarizedPower, ElementarySymmetric, Sorting, SymmetrizedMonomial };

std::string to_string(BasisFamily family);

/// Multi-indices over `vars` variables with min_degree <= |p| <= max_degree,
/// graded: lowest degree first, descending lexicographic within a degree, so
/// for two variables the order is x, y, x^2, xy, y^2, ...
std::vector<MultiIndex> graded_multi_indices(int vars, int min_degree, int max_degree);

/// Binomial coefficient as an exact integer (n <= 60).
long long binomial(int n, int k);

/// Which symmetric basis to compute, for how many particles, and its index set.
///
/// PolarizedPower / ElementarySymmetric: index_set holds every p over d axes
/// with 1 <= |p| <= n, so size() = C(n+d, d) - 1.
/// Sorting: d = 1, index_set = (1), (2), ..., (n), the rank of the order statistic.
/// SymmetrizedMonomial: one exponent vector over all n*d coordinates per
/// orbit, 1 <= |b| <= degree_cap, with the particle blocks in descending
/// lexicographic order.
struct BasisDescriptor {
  BasisFamily family = BasisFamily::PolarizedPower;
  int n = 1;
  int d = 1;
  int degree_cap = 0;
  std::vector<MultiIndex> index_set;

  /// Position of p - e_a in {0} + index_set (0 is the constant), or -1.
  /// Filled for ElementarySymmetric only.
  std::vector<std::vector<int>> lower_neighbour;

  static BasisDescriptor polarized(int n, int d = 1);
  static BasisDescriptor elementary(int n, int d = 1);
  static BasisDescriptor sorting(int n);
  static BasisDescriptor symmetrized_monomial(int n, int degree_cap, int d = 1);

  int size() const { return static_cast<int>(index_set.size()); }
  /// CSV column labels, e.g. "p=1,0,2".
  std::vector<std::string> labels() const;
};

namespace detail {
void require_family(const BasisDescriptor& desc, BasisFamily family, const char* op);
void require_shape(const BasisDescriptor& desc, Eigen::Index rows, Eigen::Index cols, const char* op);
} // namespace detail

/// Per-particle template: eta_p(x) = prod_a x_a^{p_a} for each p in the index set.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> eta(const BasisDescriptor& desc,
                                                                const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  detail::require_family(desc, BasisFamily::PolarizedPower, "eta");
  if (x.size() != desc.d) throw ShapeError("eta: particle has " + std::to_string(x.size()) + " coordinates, expected d");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> powers(desc.d, desc.n + 1);
  for (int a = 0; a < desc.d; ++a) {
    powers(a, 0) = Scalar(1);
    for (int k = 1; k <= desc.n; ++k) powers(a, k) = powers(a, k - 1) * x(a);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(desc.size());
  for (int b = 0; b < desc.size(); ++b) {
    Scalar v(1);
    const MultiIndex& p = desc.index_set[static_cast<std::size_t>(b)];
    for (int a = 0; a < desc.d; ++a) v *= powers(a, p[static_cast<std::size_t>(a)]);
    out(b) = v;
  }
  return out;
}

/// beta(X) = sum_i eta(x_i); the power sums p_b for d = 1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> polarized_basis(const BasisDescriptor& desc,
                                                                            const Eigen::MatrixBase<Derived>& X) {
  detail::require_family(desc, BasisFamily::PolarizedPower, "polarized_basis");
  detail::require_shape(desc, X.rows(), X.cols(), "polarized_basis");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> beta =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>::Zero(desc.size());
  for (Eigen::Index i = 0; i < X.cols(); ++i) beta += eta(desc, X.col(i));
  return beta;
}

/// Coefficients e_p of prod_i (1 + sum_a lambda_a x_{a,i}), truncated at
/// total degree n, expanded one particle at a time. The constant is dropped.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> elementary_symmetric(const BasisDescriptor& desc,
                                                                                 const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  detail::require_family(desc, BasisFamily::ElementarySymmetric, "elementary_symmetric");
  detail::require_shape(desc, X.rows(), X.cols(), "elementary_symmetric");
  const int full = desc.size() + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeff = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(full);
  coeff(0) = Scalar(1);
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    // descending positions read only lower-degree, not yet updated entries
    for (int b = full - 1; b > 0; --b) {
      const auto& lower = desc.lower_neighbour[static_cast<std::size_t>(b)];
      Scalar acc = coeff(b);
      for (int a = 0; a < desc.d; ++a)
        if (lower[static_cast<std::size_t>(a)] >= 0) acc += X(a, i) * coeff(lower[static_cast<std::size_t>(a)]);
      coeff(b) = acc;
    }
  }
  return coeff.tail(desc.size());
}

/// Newton's identities, d = 1: k e_k = sum_{j=1}^k (-1)^{j-1} e_{k-j} p_j.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> newton_e_from_p(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = p.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e(n + 1);
  e(0) = Scalar(1);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Scalar acc(0);
    for (Eigen::Index j = 1; j <= k; ++j) {
      const Scalar term = e(k - j) * p(j - 1);
      acc += (j % 2 == 1) ? term : Scalar(-term);
    }
    e(k) = acc / Scalar(k);
  }
  return e.tail(n);
}

/// Order statistics x_[1] <= ... <= x_[n]. Only d = 1 gives a continuous basis.
Eigen::VectorXd sorting_basis(const ParticleConfig& X);

/// sum over all p of prod_i x_{p(i)}^{b_i} for each representative b (no 1/n!).
Eigen::VectorXd symmetrized_monomial_basis(const BasisDescriptor& desc, const ParticleConfig& X);

/// Dispatches on desc.family.
Eigen::VectorXd basis_vector(const BasisDescriptor& desc, const ParticleConfig& X);

/// Outer polynomial g: R^m -> R over all monomials in beta of degree <= degree.
struct PolynomialHead {
  int inputs = 0;
  int degree = 0;
  std::vector<MultiIndex> exponents;
  Eigen::VectorXd coefficients;
  int rank = 0;
  double condition_number = 0.0;
  bool rank_deficient = false;
  double max_residual = 0.0;
  double rms_residual = 0.0;

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& beta) const;
};

/// Relative singular value threshold for rank decisions in fit_outer.
inline constexpr double kFitRankTolerance = 1e-10;

/// Least-squares polynomial g with g(features.row(s)) ~ targets(s).
/// Rows of `features` are basis vectors beta(X_s). Rank-deficient designs get
/// the minimum-norm solution and rank_deficient = true.
PolynomialHead fit_outer(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, int degree);

/// Header of labels, then one row per configuration.
void write_basis_csv(std::ostream& os, const BasisDescriptor& desc, const std::vector<ParticleConfig>& samples);

} // namespace equisym
