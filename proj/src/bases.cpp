#include "equisym/bases.hpp"

#include <map>
#include <ostream>

namespace equisym {

std::string to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::PolarizedPower: return "polarized";
    case BasisFamily::ElementarySymmetric: return "elementary";
    case BasisFamily::Sorting: return "sorting";
    case BasisFamily::SymmetrizedMonomial: return "symmetrized-monomial";
  }
  return "unknown";
}

namespace {

// descending lexicographic order within one degree
void compositions(int vars, int degree, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  const auto pos = prefix.size();
  if (static_cast<int>(pos) == vars - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = degree; e >= 0; --e) {
    prefix.push_back(e);
    compositions(vars, degree - e, prefix, out);
    prefix.pop_back();
  }
}

bool blocks_descending(const MultiIndex& b, int d) {
  const auto blocks = b.size() / static_cast<std::size_t>(d);
  for (std::size_t i = 0; i + 1 < blocks; ++i) {
    auto first = b.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d));
    auto next = first + d;
    if (std::lexicographical_compare(first, next, next, next + d)) return false;
  }
  return true;
}

std::string join_label(const std::string& prefix, const MultiIndex& k) {
  std::string s = prefix;
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s;
}

void check_sizes(int n, int d) {
  if (n < 1 || d < 1) throw ShapeError("basis needs n >= 1 and d >= 1");
}

} // namespace

std::vector<MultiIndex> graded_multi_indices(int vars, int min_degree, int max_degree) {
  std::vector<MultiIndex> out;
  MultiIndex prefix;
  for (int deg = min_degree; deg <= max_degree; ++deg) compositions(vars, deg, prefix, out);
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace detail {

void require_family(const BasisDescriptor& desc, BasisFamily family, const char* op) {
  if (desc.family != family)
    throw DomainError(std::string(op) + ": descriptor family is " + to_string(desc.family) + ", expected " +
                      to_string(family));
}

void require_shape(const BasisDescriptor& desc, Eigen::Index rows, Eigen::Index cols, const char* op) {
  if (rows != desc.d || cols != desc.n)
    throw ShapeError(std::string(op) + ": configuration is " + std::to_string(rows) + "x" + std::to_string(cols) +
                     ", descriptor expects " + std::to_string(desc.d) + "x" + std::to_string(desc.n));
}

} // namespace detail

BasisDescriptor BasisDescriptor::polarized(int n, int d) {
  check_sizes(n, d);
  return {BasisFamily::PolarizedPower, n, d, n, graded_multi_indices(d, 1, n), {}};
}

BasisDescriptor BasisDescriptor::elementary(int n, int d) {
  check_sizes(n, d);
  BasisDescriptor desc{BasisFamily::ElementarySymmetric, n, d, n, graded_multi_indices(d, 1, n), {}};
  std::map<MultiIndex, int> position;
  position.emplace(MultiIndex(static_cast<std::size_t>(d), 0), 0);
  for (int b = 0; b < desc.size(); ++b) position.emplace(desc.index_set[static_cast<std::size_t>(b)], b + 1);
  desc.lower_neighbour.assign(static_cast<std::size_t>(desc.size() + 1), std::vector<int>(static_cast<std::size_t>(d), -1));
  for (int b = 0; b < desc.size(); ++b) {
    MultiIndex p = desc.index_set[static_cast<std::size_t>(b)];
    for (int a = 0; a < d; ++a) {
      if (p[static_cast<std::size_t>(a)] == 0) continue;
      --p[static_cast<std::size_t>(a)];
      desc.lower_neighbour[static_cast<std::size_t>(b + 1)][static_cast<std::size_t>(a)] = position.at(p);
      ++p[static_cast<std::size_t>(a)];
    }
  }
  return desc;
}

BasisDescriptor BasisDescriptor::sorting(int n) {
  check_sizes(n, 1);
  BasisDescriptor desc{BasisFamily::Sorting, n, 1, 0, {}, {}};
  for (int b = 1; b <= n; ++b) desc.index_set.push_back({b});
  return desc;
}

BasisDescriptor BasisDescriptor::symmetrized_monomial(int n, int degree_cap, int d) {
  check_sizes(n, d);
  if (n > kMaxPolyOrbitN)
    throw OracleSizeError("symmetrized monomials limited to n <= 8, got n = " + std::to_string(n));
  if (degree_cap < 1) throw ShapeError("symmetrized monomials need degree cap >= 1");
  BasisDescriptor desc{BasisFamily::SymmetrizedMonomial, n, d, degree_cap, {}, {}};
  for (auto& b : graded_multi_indices(n * d, 1, degree_cap))
    if (blocks_descending(b, d)) desc.index_set.push_back(std::move(b));
  return desc;
}

std::vector<std::string> BasisDescriptor::labels() const {
  std::vector<std::string> out;
  for (const auto& k : index_set) {
    switch (family) {
      case BasisFamily::Sorting: out.push_back("x[" + std::to_string(k[0]) + "]"); break;
      case BasisFamily::SymmetrizedMonomial: out.push_back(join_label("b=", k)); break;
      default: out.push_back(join_label("p=", k)); break;
    }
  }
  return out;
}

Eigen::VectorXd sorting_basis(const ParticleConfig& X) {
  check_config(X);
  if (X.rows() != 1)
    throw DomainError("sorting_basis: d = " + std::to_string(X.rows()) +
                      " > 1 gives a discontinuous basis; use lex_sort_perm for the d > 1 construction");
  Eigen::VectorXd v = X.row(0).transpose();
  std::sort(v.begin(), v.end());
  return v;
}

Eigen::VectorXd symmetrized_monomial_basis(const BasisDescriptor& desc, const ParticleConfig& X) {
  detail::require_family(desc, BasisFamily::SymmetrizedMonomial, "symmetrized_monomial_basis");
  detail::require_shape(desc, X.rows(), X.cols(), "symmetrized_monomial_basis");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(desc.size());
  for_each_permutation(desc.n, [&](const Permutation& perm) {
    for (int b = 0; b < desc.size(); ++b) {
      const MultiIndex& k = desc.index_set[static_cast<std::size_t>(b)];
      double term = 1.0;
      for (int i = 0; i < desc.n; ++i)
        for (int a = 0; a < desc.d; ++a) {
          const int e = k[static_cast<std::size_t>(i * desc.d + a)];
          for (int r = 0; r < e; ++r) term *= X(a, perm[i]);
        }
      out(b) += term;
    }
  });
  return out;
}

Eigen::VectorXd basis_vector(const BasisDescriptor& desc, const ParticleConfig& X) {
  switch (desc.family) {
    case BasisFamily::PolarizedPower: return polarized_basis(desc, X);
    case BasisFamily::ElementarySymmetric: return elementary_symmetric(desc, X);
    case BasisFamily::Sorting:
      detail::require_shape(desc, X.rows(), X.cols(), "sorting_basis");
      return sorting_basis(X);
    case BasisFamily::SymmetrizedMonomial: return symmetrized_monomial_basis(desc, X);
  }
  throw DomainError("basis_vector: unknown family");
}

double PolynomialHead::evaluate(const Eigen::Ref<const Eigen::VectorXd>& beta) const {
  if (beta.size() != inputs) throw ShapeError("PolynomialHead: expected " + std::to_string(inputs) + " inputs");
  double sum = 0.0;
  for (std::size_t t = 0; t < exponents.size(); ++t) {
    double term = coefficients(static_cast<Eigen::Index>(t));
    for (int v = 0; v < inputs; ++v)
      for (int r = 0; r < exponents[t][static_cast<std::size_t>(v)]; ++r) term *= beta(v);
    sum += term;
  }
  return sum;
}

PolynomialHead fit_outer(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, int degree) {
  if (features.rows() != targets.size()) throw ShapeError("fit_outer: one target per feature row required");
  if (degree < 0) throw ShapeError("fit_outer: degree must be >= 0");
  PolynomialHead head;
  head.inputs = static_cast<int>(features.cols());
  head.degree = degree;
  head.exponents = graded_multi_indices(head.inputs, 0, degree);
  const auto terms = static_cast<Eigen::Index>(head.exponents.size());
  if (features.rows() < terms)
    throw ShapeError("fit_outer: " + std::to_string(features.rows()) + " samples for " + std::to_string(terms) +
                     " free coefficients");

  Eigen::MatrixXd design(features.rows(), terms);
  for (Eigen::Index s = 0; s < features.rows(); ++s)
    for (Eigen::Index t = 0; t < terms; ++t) {
      double v = 1.0;
      const MultiIndex& k = head.exponents[static_cast<std::size_t>(t)];
      for (int j = 0; j < head.inputs; ++j)
        for (int r = 0; r < k[static_cast<std::size_t>(j)]; ++r) v *= features(s, j);
      design(s, t) = v;
    }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kFitRankTolerance);
  const Eigen::VectorXd& sigma = svd.singularValues();
  head.rank = static_cast<int>(svd.rank());
  head.rank_deficient = head.rank < terms;
  head.condition_number = sigma(sigma.size() - 1) > 0.0 ? sigma(0) / sigma(sigma.size() - 1)
                                                        : std::numeric_limits<double>::infinity();
  head.coefficients = svd.solve(targets);

  const Eigen::VectorXd residual = design * head.coefficients - targets;
  head.max_residual = residual.cwiseAbs().maxCoeff();
  head.rms_residual = std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
  return head;
}

void write_basis_csv(std::ostream& os, const BasisDescriptor& desc, const std::vector<ParticleConfig>& samples) {
  const auto labels = desc.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) os << ',';
    // labels contain commas, so they are always quoted
    os << '"' << labels[i] << '"';
  }
  os << '\n';
  char buf[32];
  for (const auto& X : samples) {
    const Eigen::VectorXd beta = basis_vector(desc, X);
    for (Eigen::Index b = 0; b < beta.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", beta(b));
      os << (b ? "," : "") << buf;
    }
    os << '\n';
  }
}

} // namespace equisym
