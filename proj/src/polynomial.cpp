#include "equisym/polynomial.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace equisym {

namespace {

// Unevaluated sum hi + lo carrying about 106 bits.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

DoubleDouble times(DoubleDouble a, double x) {
  const double p = a.hi * x;
  const double err = std::fma(a.hi, x, -p) + a.lo * x;
  return two_sum(p, err);
}

DoubleDouble plus(DoubleDouble a, DoubleDouble b) {
  const DoubleDouble s = two_sum(a.hi, b.hi);
  return two_sum(s.hi, s.lo + a.lo + b.lo);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

SparsePolynomial orbit_sum(const SparsePolynomial& p, Normalization norm, bool signed_weights) {
  if (p.n() > kMaxPolyOrbitN)
    throw OracleSizeError("polynomial orbit sums limited to n <= 8, got n = " + std::to_string(p.n()));
  SparsePolynomial out(p.n(), p.d());
  for_each_permutation(p.n(), [&](const Permutation& perm) {
    const double w = signed_weights ? perm.parity() : 1.0;
    const SparsePolynomial moved = p.permuted(perm);
    for (const auto& [k, c] : moved.terms()) out.add_term(k, w * c);
  });
  if (norm == Normalization::Mean) {
    // divide rather than multiply by 1/n! so integer orbit sums stay exact
    const double nf = factorial(p.n());
    SparsePolynomial scaled(p.n(), p.d());
    for (const auto& [k, c] : out.terms()) scaled.add_term(k, c / nf);
    return scaled;
  }
  return out;
}

} // namespace

int total_degree(const MultiIndex& k) { return std::accumulate(k.begin(), k.end(), 0); }

SparsePolynomial::SparsePolynomial(int n, int d) : n_(n), d_(d) {
  if (n < 1 || d < 1) throw ShapeError("SparsePolynomial: n and d must be >= 1");
}

SparsePolynomial SparsePolynomial::constant(int n, int d, double c) {
  SparsePolynomial p(n, d);
  p.add_term(MultiIndex(static_cast<std::size_t>(n * d), 0), c);
  return p;
}

SparsePolynomial SparsePolynomial::variable(int n, int d, int particle, int axis) {
  if (particle < 0 || particle >= n || axis < 0 || axis >= d)
    throw ShapeError("SparsePolynomial::variable: coordinate out of range");
  MultiIndex k(static_cast<std::size_t>(n * d), 0);
  k[static_cast<std::size_t>(particle * d + axis)] = 1;
  return monomial(n, d, std::move(k));
}

SparsePolynomial SparsePolynomial::monomial(int n, int d, MultiIndex k, double c) {
  SparsePolynomial p(n, d);
  p.add_term(k, c);
  return p;
}

int SparsePolynomial::degree() const {
  int deg = 0;
  for (const auto& [k, c] : terms_) deg = std::max(deg, total_degree(k));
  return deg;
}

void SparsePolynomial::add_term(const MultiIndex& k, double c) {
  if (static_cast<int>(k.size()) != arity())
    throw ShapeError("add_term: multi-index of length " + std::to_string(k.size()) + " for arity " +
                     std::to_string(arity()));
  for (int e : k)
    if (e < 0) throw ShapeError("add_term: negative exponent");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(k, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double SparsePolynomial::coefficient(const MultiIndex& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? 0.0 : it->second;
}

double SparsePolynomial::evaluate(const ParticleConfig& X) const {
  if (X.rows() != d_ || X.cols() != n_)
    throw ShapeError("evaluate: polynomial over " + std::to_string(d_) + "x" + std::to_string(n_) +
                     " coordinates given a " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                     " configuration");
  // Terms of expanded products like the Vandermonde polynomial cancel
  // heavily, so products and the running sum are kept in double-double.
  DoubleDouble sum;
  for (const auto& [k, c] : terms_) {
    DoubleDouble term{c, 0.0};
    for (int i = 0; i < n_; ++i)
      for (int a = 0; a < d_; ++a)
        for (int e = k[static_cast<std::size_t>(i * d_ + a)]; e > 0; --e) term = times(term, X(a, i));
    sum = plus(sum, term);
  }
  return sum.hi + sum.lo;
}

SparsePolynomial SparsePolynomial::permuted(const Permutation& perm) const {
  if (perm.size() != n_) throw ShapeError("permuted: permutation size does not match n");
  SparsePolynomial out(n_, d_);
  MultiIndex moved(static_cast<std::size_t>(arity()));
  for (const auto& [k, c] : terms_) {
    for (int i = 0; i < n_; ++i)
      for (int a = 0; a < d_; ++a)
        moved[static_cast<std::size_t>(perm[i] * d_ + a)] = k[static_cast<std::size_t>(i * d_ + a)];
    out.terms_.emplace(moved, c);
  }
  return out;
}

void SparsePolynomial::check_compatible(const SparsePolynomial& q, const char* op) const {
  if (n_ != q.n_ || d_ != q.d_)
    throw ShapeError(std::string(op) + ": arity mismatch (" + std::to_string(arity()) + " vs " +
                     std::to_string(q.arity()) + ")");
}

SparsePolynomial& SparsePolynomial::operator+=(const SparsePolynomial& q) {
  check_compatible(q, "add");
  for (const auto& [k, c] : q.terms_) add_term(k, c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator-=(const SparsePolynomial& q) {
  check_compatible(q, "sub");
  for (const auto& [k, c] : q.terms_) add_term(k, -c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

SparsePolynomial operator*(const SparsePolynomial& p, const SparsePolynomial& q) {
  p.check_compatible(q, "mul");
  SparsePolynomial out(p.n_, p.d_);
  MultiIndex k(static_cast<std::size_t>(p.arity()));
  for (const auto& [kp, cp] : p.terms_)
    for (const auto& [kq, cq] : q.terms_) {
      for (std::size_t v = 0; v < k.size(); ++v) k[v] = kp[v] + kq[v];
      out.add_term(k, cp * cq);
    }
  return out;
}

SparsePolynomial pow(const SparsePolynomial& p, int e) {
  if (e < 0) throw DomainError("pow: negative exponent");
  SparsePolynomial result = SparsePolynomial::constant(p.n(), p.d(), 1.0);
  SparsePolynomial base = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

SparsePolynomial symmetrize_poly(const SparsePolynomial& p, Normalization norm) {
  return orbit_sum(p, norm, false);
}

SparsePolynomial antisymmetrize_poly(const SparsePolynomial& p, Normalization norm) {
  return orbit_sum(p, norm, true);
}

bool is_symmetric(const SparsePolynomial& p) { return symmetrize_poly(p) == p; }

bool is_antisymmetric(const SparsePolynomial& p) { return antisymmetrize_poly(p) == p; }

SparsePolynomial vandermonde_poly(int n) {
  SparsePolynomial delta = SparsePolynomial::constant(n, 1, 1.0);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i)
      delta = delta * (SparsePolynomial::variable(n, 1, i) - SparsePolynomial::variable(n, 1, j));
  return delta;
}

SparsePolynomial substitute(const SparsePolynomial& p, int target, int source) {
  if (target < 0 || target >= p.arity() || source < 0 || source >= p.arity())
    throw ShapeError("substitute: coordinate index out of range");
  SparsePolynomial out(p.n(), p.d());
  for (const auto& [key, c] : p.terms()) {
    MultiIndex k = key;
    k[static_cast<std::size_t>(source)] += k[static_cast<std::size_t>(target)];
    k[static_cast<std::size_t>(target)] = 0;
    out.add_term(k, c);
  }
  return out;
}

SparsePolynomial divide_exact(const SparsePolynomial& p, LinearFactor factor) {
  const int plus = factor.plus, minus = factor.minus;
  if (plus == minus || plus < 0 || minus < 0 || plus >= p.arity() || minus >= p.arity())
    throw ShapeError("divide_exact: invalid linear factor");
  if (!substitute(p, plus, minus).is_zero())
    throw DivisibilityError(minus + 1, plus + 1,
                            "divide_exact: polynomial does not vanish on x_" + std::to_string(plus + 1) +
                                " = x_" + std::to_string(minus + 1) + ", not divisible by (x_" +
                                std::to_string(plus + 1) + " - x_" + std::to_string(minus + 1) + ")");

  // coefficients[e] collects the terms with x_plus^e, x_plus stripped
  std::vector<SparsePolynomial> coefficients;
  for (const auto& [key, c] : p.terms()) {
    MultiIndex k = key;
    const auto e = static_cast<std::size_t>(k[static_cast<std::size_t>(plus)]);
    if (coefficients.size() <= e) coefficients.resize(e + 1, SparsePolynomial(p.n(), p.d()));
    k[static_cast<std::size_t>(plus)] = 0;
    coefficients[e].add_term(k, c);
  }

  auto times_minus = [&](const SparsePolynomial& q) {
    SparsePolynomial out(q.n(), q.d());
    for (const auto& [key, c] : q.terms()) {
      MultiIndex k = key;
      ++k[static_cast<std::size_t>(minus)];
      out.add_term(k, c);
    }
    return out;
  };

  SparsePolynomial quotient(p.n(), p.d());
  if (coefficients.size() < 2) return quotient;  // p == 0 here
  const std::size_t top = coefficients.size() - 1;
  SparsePolynomial carry = coefficients[top];
  for (std::size_t e = top; e-- > 0;) {
    // carry is the coefficient of x_plus^e in the quotient
    for (const auto& [key, c] : carry.terms()) {
      MultiIndex k = key;
      k[static_cast<std::size_t>(plus)] = static_cast<int>(e);
      quotient.add_term(k, c);
    }
    if (e > 0) carry = coefficients[e] + times_minus(carry);
  }
  return quotient;
}

void write_text(std::ostream& os, const SparsePolynomial& p) {
  os << "# n=" << p.n() << " d=" << p.d() << '\n';
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& [k, c] : p.terms()) {
    line.str("");
    line << c;
    for (int e : k) line << ' ' << e;
    os << line.str() << '\n';
  }
}

SparsePolynomial read_text(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ShapeError("read_text: missing header");
  int n = 0, d = 0;
  if (std::sscanf(header.c_str(), "# n=%d d=%d", &n, &d) != 2 || n < 1 || d < 1)
    throw ShapeError("read_text: malformed header '" + header + "'");
  SparsePolynomial p(n, d);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double c = 0.0;
    if (!(ls >> c)) throw ShapeError("read_text: malformed term '" + line + "'");
    MultiIndex k;
    for (int e; ls >> e;) k.push_back(e);
    if (!ls.eof()) throw ShapeError("read_text: malformed exponent in '" + line + "'");
    p.add_term(k, c);
  }
  return p;
}

std::string to_text(const SparsePolynomial& p) {
  std::ostringstream os;
  write_text(os, p);
  return os.str();
}

SparsePolynomial from_text(const std::string& text) {
  std::istringstream is(text);
  return read_text(is);
}

} // namespace equisym
