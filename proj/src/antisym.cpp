#include "equisym/antisym.hpp"

#include <cmath>
#include <utility>

namespace equisym {

double cofactor_det(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ShapeError("cofactor_det: matrix is not square");
  const Eigen::Index n = M.rows();
  if (n == 0) return 1.0;
  if (n == 1) return M(0, 0);
  if (n == 2) return M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  if (n > 6) throw OracleSizeError("cofactor_det: limited to n <= 6");
  double det = 0.0;
  Eigen::MatrixXd minor(n - 1, n - 1);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (M(0, c) == 0.0) continue;
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index k = 0, mk = 0; k < n; ++k)
        if (k != c) minor(r - 1, mk++) = M(r, k);
    const double term = M(0, c) * cofactor_det(minor);
    det += (c % 2 == 0) ? term : -term;
  }
  return det;
}

DetGradient det_gradient(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ShapeError("det_gradient: matrix is not square");
  const Eigen::Index n = M.rows();
  DetGradient out;
  out.gradient.resize(n, n);
  if (n == 1) {
    out.det = M(0, 0);
    out.gradient(0, 0) = 1.0;
    return out;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  out.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();

  if (out.condition <= kDetGradientMaxCondition) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    out.det = lu.determinant();
    out.gradient = out.det * lu.inverse().transpose();
    out.method = DetGradient::Method::LuInverse;
    return out;
  }

  if (n <= 4) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index i = 0, mi = 0; i < n; ++i) {
          if (i == r) continue;
          for (Eigen::Index k = 0, mk = 0; k < n; ++k)
            if (k != c) minor(mi, mk++) = M(i, k);
          ++mi;
        }
        const double cof = cofactor_det(minor);
        out.gradient(r, c) = ((r + c) % 2 == 0) ? cof : -cof;
      }
    out.det = cofactor_det(M);
    out.method = DetGradient::Method::Cofactor;
    return out;
  }

  // adj(M) = det(U) det(V) V diag(prod_{k != i} s_k) U^T
  Eigen::VectorXd others(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i) prod *= s(k);
    others(i) = prod;
  }
  const double orientation = svd.matrixU().partialPivLu().determinant() * svd.matrixV().partialPivLu().determinant();
  const Eigen::MatrixXd adj = orientation * svd.matrixV() * others.asDiagonal() * svd.matrixU().transpose();
  out.gradient = adj.transpose();
  out.det = orientation * s.prod();
  out.method = DetGradient::Method::SvdAdjugate;
  return out;
}

AsFunction AsFunction::from_polynomial(SparsePolynomial psi) {
  AsFunction f;
  f.kind_ = Kind::OraclePoly;
  f.n_ = psi.n();
  f.d_ = psi.d();
  if (psi.n() <= kMaxPolyOrbitN) {
    if (!is_antisymmetric(psi)) throw NotAntisymmetricError("AsFunction: polynomial is not anti-symmetric");
  }
  f.poly_ = std::move(psi);
  if (f.n_ > kMaxPolyOrbitN) f.spot_check();
  if (f.d_ == 1) f.chi_ = chi_from_psi_poly(*f.poly_);
  return f;
}

AsFunction AsFunction::from_callable(int n, int d, ScalarFunction psi) {
  if (n < 1 || d < 1) throw ShapeError("AsFunction: n and d must be >= 1");
  AsFunction f;
  f.kind_ = Kind::Callable;
  f.n_ = n;
  f.d_ = d;
  f.fn_ = std::move(psi);
  f.spot_check();
  return f;
}

double AsFunction::operator()(const ParticleConfig& X) const {
  if (X.rows() != d_ || X.cols() != n_) throw ShapeError("AsFunction: configuration shape mismatch");
  return poly_ ? poly_->evaluate(X) : fn_(X);
}

double AsFunction::chi_value(const ParticleConfig& X) const {
  if (d_ != 1) throw DomainError("chi is defined for d = 1 only");
  if (chi_) return chi_->evaluate(X);
  return chi_from_psi_numeric([this](const ParticleConfig& Y) { return (*this)(Y); }, X);
}

void AsFunction::spot_check() const {
  if (n_ < 2) return;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<int> images(static_cast<std::size_t>(n_));
  for (int trial = 0; trial < 20; ++trial) {
    ParticleConfig X(d_, n_);
    for (Eigen::Index k = 0; k < X.size(); ++k) X(k) = coord(rng);
    std::iota(images.begin(), images.end(), 0);
    std::shuffle(images.begin(), images.end(), rng);
    const Permutation p(images);
    const double a = (*this)(apply(p, X));
    const double b = p.parity() * (*this)(X);
    if (!std::isfinite(a) || !std::isfinite(b))
      throw NotAntisymmetricError("AsFunction: non-finite value during anti-symmetry check");
    if (std::abs(a - b) > 1e-10 * std::max({1.0, std::abs(a), std::abs(b)}))
      throw NotAntisymmetricError("AsFunction: psi(pX) != sign(p) psi(X) (difference " +
                                  std::to_string(std::abs(a - b)) + ")");
  }
}

SparsePolynomial chi_from_psi_poly(const SparsePolynomial& psi) {
  if (psi.d() != 1) throw DomainError("chi_from_psi_poly: d = 1 only");
  if (psi.n() <= kMaxPolyOrbitN && !is_antisymmetric(psi))
    throw NotAntisymmetricError("chi_from_psi_poly: input is not anti-symmetric");
  SparsePolynomial chi = psi;
  for (int i = 0; i < psi.n(); ++i)
    for (int j = i + 1; j < psi.n(); ++j) chi = divide_exact(chi, {i, j});
  return chi;
}

double coincidence_tolerance(const ParticleConfig& X) { return 1e-6 * (1.0 + X.cwiseAbs().maxCoeff()); }

namespace {

// TODO: nested central differences lose most digits when three or more
// particles coincide; a wider stencil or a polynomial fit would fix that.
double divided_stage(const ScalarFunction& psi, const std::vector<std::pair<int, int>>& pairs, std::size_t stage,
                     const ParticleConfig& X, double tau) {
  if (stage == 0) {
    const double v = psi(X);
    if (std::isnan(v)) throw DomainError("chi_from_psi_numeric: psi returned NaN");
    return v;
  }
  const auto [i, j] = pairs[stage - 1];
  const double gap = X(0, j) - X(0, i);
  if (std::abs(gap) >= tau) return divided_stage(psi, pairs, stage - 1, X, tau) / gap;
  ParticleConfig up = X, down = X;
  up(0, j) += tau;
  down(0, j) -= tau;
  return (divided_stage(psi, pairs, stage - 1, up, tau) - divided_stage(psi, pairs, stage - 1, down, tau)) /
         (2.0 * tau);
}

} // namespace

double chi_from_psi_numeric(const ScalarFunction& psi, const ParticleConfig& X) {
  check_config(X);
  if (X.rows() != 1) throw DomainError("chi_from_psi_numeric: d = 1 only");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < X.cols(); ++i)
    for (int j = i + 1; j < X.cols(); ++j) pairs.emplace_back(i, j);
  return divided_stage(psi, pairs, pairs.size(), X, coincidence_tolerance(X));
}

GsdMatrix gsd_build_1d(const AsFunction& psi, const ParticleConfig& X) {
  check_config(X);
  if (psi.d() != 1 || X.rows() != 1) throw DomainError("gsd_build_1d: d = 1 only");
  if (X.cols() != psi.n()) throw ShapeError("gsd_build_1d: particle count mismatch");
  const Eigen::Index n = X.cols();
  GsdMatrix phi(n, n);
  phi.col(0).setConstant(psi.chi_value(X));
  for (Eigen::Index j = 0; j < n; ++j) {
    double power = 1.0;
    for (Eigen::Index i = 1; i < n; ++i) {
      power *= X(0, j);
      phi(j, i) = power;
    }
  }
  return phi;
}

Permutation lex_sort_perm(const ParticleConfig& X) {
  check_config(X);
  std::vector<int> order(static_cast<std::size_t>(X.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      if (X(r, a) < X(r, b)) return true;
      if (X(r, a) > X(r, b)) return false;
    }
    return false;
  });
  return Permutation(std::move(order));
}

GsdMatrix gsd_build_nd(const AsFunction& psi, const ParticleConfig& X, SignMode mode) {
  check_config(X);
  if (X.rows() != psi.d() || X.cols() != psi.n()) throw ShapeError("gsd_build_nd: configuration shape mismatch");
  const int n = psi.n();
  const Permutation order = lex_sort_perm(X);
  const double sorted_value = psi(apply(order, X));
  double first = sorted_value, rest = 1.0;
  if (mode == SignMode::NthRoot) {
    rest = std::pow(std::abs(sorted_value), 1.0 / n);
    first = sorted_value < 0.0 ? -rest : rest;
  }
  GsdMatrix phi = GsdMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) phi(order[i], i) = i == 0 ? first : rest;
  return phi;
}

GsdMatrix n2_continuous_gsd(const AsFunction& psi, const ParticleConfig& X) {
  if (psi.n() != 2 || X.cols() != 2) throw DomainError("n2_continuous_gsd: n = 2 only");
  if (X.rows() != psi.d()) throw ShapeError("n2_continuous_gsd: dimension mismatch");
  ParticleConfig swapped(X.rows(), 2);
  swapped << X.col(1), X.col(0);
  GsdMatrix phi(2, 2);
  phi << psi(X), 0.5, psi(swapped), 0.5;
  return phi;
}

SparsePolynomial random_as_polynomial(int n, int sym_degree, std::mt19937_64& rng, int monomials) {
  std::uniform_int_distribution<int> coef(-3, 3), degree(0, sym_degree), slot(0, n - 1);
  SparsePolynomial chi(n, 1);
  while (chi.is_zero()) {
    for (int m = 0; m < monomials; ++m) {
      MultiIndex k(static_cast<std::size_t>(n), 0);
      for (int deg = degree(rng); deg > 0; --deg) ++k[static_cast<std::size_t>(slot(rng))];
      int c = 0;
      while (c == 0) c = coef(rng);
      chi += symmetrize_poly(SparsePolynomial::monomial(n, 1, k, c), Normalization::OrbitSum);
    }
  }
  return vandermonde_poly(n) * chi;
}

ScalarFunction random_smooth_function(int n, int d, std::mt19937_64& rng, int ridges) {
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::vector<Eigen::VectorXd> w;
  std::vector<double> a, b;
  for (int r = 0; r < ridges; ++r) {
    Eigen::VectorXd wr(n * d);
    for (Eigen::Index k = 0; k < wr.size(); ++k) wr(k) = weight(rng);
    w.push_back(wr);
    a.push_back(weight(rng) + (weight(rng) < 0 ? -1.0 : 1.0));
    b.push_back(weight(rng));
  }
  return [w, a, b](const ParticleConfig& X) {
    const Eigen::Map<const Eigen::VectorXd> flat(X.data(), X.size());
    double v = 0.0;
    for (std::size_t r = 0; r < w.size(); ++r) v += a[r] * std::tanh(w[r].dot(flat) + b[r]);
    return v;
  };
}

AsFunction oracle_antisymmetrized(int n, int d, ScalarFunction f) {
  return AsFunction::from_callable(
      n, d, [f = std::move(f)](const ParticleConfig& X) { return antisymmetrize(f, X); });
}

} // namespace equisym
