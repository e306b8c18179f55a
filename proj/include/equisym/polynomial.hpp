#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "equisym/permutation.hpp"

namespace equisym {

/// Exponents of the n*d scalar coordinates. Coordinate a of particle i lives
/// at position i*d + a.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& k);

/// Multivariate polynomial in the n*d coordinates of a ParticleConfig.
///
/// Terms are kept in a sorted map and zero coefficients are never stored, so
/// two polynomials are equal iff their term maps are equal.
class SparsePolynomial {
public:
  using Terms = std::map<MultiIndex, double>;

  SparsePolynomial() = default;
  explicit SparsePolynomial(int n, int d = 1);

  static SparsePolynomial constant(int n, int d, double c);
  /// The coordinate `axis` of particle `particle` (both 0-based).
  static SparsePolynomial variable(int n, int d, int particle, int axis = 0);
  static SparsePolynomial monomial(int n, int d, MultiIndex k, double c = 1.0);

  int n() const { return n_; }
  int d() const { return d_; }
  int arity() const { return n_ * d_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  /// Adds c to the coefficient of x^k; the term disappears if it cancels.
  void add_term(const MultiIndex& k, double c);
  double coefficient(const MultiIndex& k) const;

  double evaluate(const ParticleConfig& X) const;
  double operator()(const ParticleConfig& X) const { return evaluate(X); }

  /// q with q(X) = p(apply(perm, X)).
  SparsePolynomial permuted(const Permutation& perm) const;

  SparsePolynomial& operator+=(const SparsePolynomial& q);
  SparsePolynomial& operator-=(const SparsePolynomial& q);
  SparsePolynomial& operator*=(double c);

  friend SparsePolynomial operator+(SparsePolynomial p, const SparsePolynomial& q) { return p += q; }
  friend SparsePolynomial operator-(SparsePolynomial p, const SparsePolynomial& q) { return p -= q; }
  friend SparsePolynomial operator-(SparsePolynomial p) { return p *= -1.0; }
  friend SparsePolynomial operator*(SparsePolynomial p, double c) { return p *= c; }
  friend SparsePolynomial operator*(double c, SparsePolynomial p) { return p *= c; }
  friend SparsePolynomial operator*(const SparsePolynomial& p, const SparsePolynomial& q);

  friend bool operator==(const SparsePolynomial&, const SparsePolynomial&) = default;

private:
  void check_compatible(const SparsePolynomial& q, const char* op) const;

  int n_ = 0;
  int d_ = 1;
  Terms terms_;
};

SparsePolynomial pow(const SparsePolynomial& p, int e);

/// Largest n accepted by the orbit-sum operations below.
inline constexpr int kMaxPolyOrbitN = 8;

enum class Normalization {
  Mean,     ///< (1/n!) sum over the orbit
  OrbitSum  ///< plain sum over the orbit
};

/// Orbit sum of p over S_n acting on whole particle blocks.
SparsePolynomial symmetrize_poly(const SparsePolynomial& p, Normalization norm = Normalization::Mean);
/// Parity-weighted orbit sum.
SparsePolynomial antisymmetrize_poly(const SparsePolynomial& p, Normalization norm = Normalization::Mean);

bool is_symmetric(const SparsePolynomial& p);
bool is_antisymmetric(const SparsePolynomial& p);

/// prod_{j<i} (x_i - x_j), d = 1, expanded.
SparsePolynomial vandermonde_poly(int n);

/// The linear factor x_plus - x_minus over scalar coordinate indices.
struct LinearFactor {
  int minus;
  int plus;
};

/// q with q * (x_plus - x_minus) = p exactly.
///
/// p is treated as univariate in x_plus with polynomial coefficients and the
/// root x_plus = x_minus is removed by synthetic division. Throws
/// DivisibilityError when the remainder p|_{x_plus = x_minus} is not
/// identically zero.
SparsePolynomial divide_exact(const SparsePolynomial& p, LinearFactor factor);

/// p with x_target replaced by x_source.
SparsePolynomial substitute(const SparsePolynomial& p, int target, int source);

/// Text form: a header line "# n=<n> d=<d>", then one term per line
/// "coeff k_1 ... k_{nd}" in multi-index order. Coefficients are written with
/// 17 significant digits so reading back is exact.
void write_text(std::ostream& os, const SparsePolynomial& p);
SparsePolynomial read_text(std::istream& is);
std::string to_text(const SparsePolynomial& p);
SparsePolynomial from_text(const std::string& text);

} // namespace equisym
