#include <doctest.h>

#include <cmath>
#include <random>

#include "equisym/antisym.hpp"
#include "oracles.hpp"

using namespace equisym;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ParticleConfig row(std::initializer_list<double> values) {
  ParticleConfig X(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) X(0, i++) = v;
  return X;
}

} // namespace

TEST_CASE("vandermonde equals the determinant of [x_j^i]") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 6; ++n) {
    const Eigen::VectorXd x = oracle::uniform_matrix(n, 1, 1.0, rng);
    Eigen::MatrixXd M(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) M(j, i) = std::pow(x(j), i);
    CHECK(vandermonde(x) == doctest::Approx(oracle::leibniz_det(M)).epsilon(1e-12));
    CHECK(vandermonde(x) == doctest::Approx(oracle::vandermonde_product(x)).epsilon(1e-14));
  }
}

TEST_CASE("slater_det and cofactor_det agree with Leibniz") {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 6; ++n) {
    const Eigen::MatrixXd M = oracle::uniform_matrix(n, n, 1.0, rng);
    const double ref = oracle::leibniz_det(M);
    CHECK(slater_det(M) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(cofactor_det(M) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK_THROWS_AS(slater_det(Eigen::MatrixXd::Zero(2, 3)), ShapeError);
}

TEST_CASE("det_gradient matches finite differences") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 5; ++n) {
    const Eigen::MatrixXd M = oracle::uniform_matrix(n, n, 1.0, rng);
    const DetGradient g = det_gradient(M);
    CHECK(g.method == DetGradient::Method::LuInverse);
    const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
    const Eigen::VectorXd fd = oracle::central_difference(
        [n](const Eigen::VectorXd& t) { return oracle::leibniz_det(Eigen::Map<const Eigen::MatrixXd>(t.data(), n, n)); },
        theta);
    CHECK((Eigen::Map<const Eigen::VectorXd>(g.gradient.data(), g.gradient.size()) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("det_gradient stays finite on singular matrices") {
  std::mt19937_64 rng(4);
  for (int n : {3, 6}) {
    Eigen::MatrixXd M = oracle::uniform_matrix(n, n, 1.0, rng);
    M.col(n - 1) = M.col(0) + M.col(1);  // rank n - 1
    const DetGradient g = det_gradient(M);
    CHECK(g.method != DetGradient::Method::LuInverse);
    CHECK(g.gradient.allFinite());
    // d det / d M(r, c) is the (r, c) cofactor
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (int i = 0, ii = 0; i < n; ++i) {
          if (i == r) continue;
          for (int j = 0, jj = 0; j < n; ++j) {
            if (j == c) continue;
            minor(ii, jj++) = M(i, j);
          }
          ++ii;
        }
        const double cof = ((r + c) % 2 == 0 ? 1.0 : -1.0) * oracle::leibniz_det(minor);
        CHECK(g.gradient(r, c) == doctest::Approx(cof).epsilon(1e-8).scale(1.0));
      }
  }
}

TEST_CASE("chi_from_psi_poly divides out the Vandermonde factor") {
  for (int n = 1; n <= 5; ++n) {
    const auto chi = chi_from_psi_poly(vandermonde_poly(n));
    CHECK(chi == SparsePolynomial::constant(n, 1, 1.0));
  }
  const int n = 3;
  SparsePolynomial e1(n, 1);
  for (int i = 0; i < n; ++i) e1 += SparsePolynomial::variable(n, 1, i);
  CHECK(chi_from_psi_poly(vandermonde_poly(n) * e1) == e1);
  CHECK_THROWS_AS(chi_from_psi_poly(e1), NotAntisymmetricError);
}

TEST_CASE("random anti-symmetric polynomials divide to a symmetric chi") {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 5; ++n) {
    const auto psi = random_as_polynomial(n, 6, rng);
    CHECK(is_antisymmetric(psi));
    const auto chi = chi_from_psi_poly(psi);
    CHECK(symmetrize_poly(chi) == chi);
    CHECK(chi * vandermonde_poly(n) == psi);
  }
}

TEST_CASE("AsFunction validates anti-symmetry") {
  CHECK_THROWS_AS(AsFunction::from_polynomial(SparsePolynomial::variable(2, 1, 0)), NotAntisymmetricError);
  CHECK_THROWS_AS(AsFunction::from_callable(2, 1, [](const ParticleConfig& X) { return X.sum(); }),
                  NotAntisymmetricError);
  const auto psi = AsFunction::from_callable(2, 1, [](const ParticleConfig& X) { return std::sin(X(0, 0) - X(0, 1)); });
  CHECK(psi.kind() == AsFunction::Kind::Callable);
  CHECK(psi.chi() == nullptr);
  const auto delta = AsFunction::from_polynomial(vandermonde_poly(3));
  REQUIRE(delta.chi() != nullptr);
  CHECK(delta.chi_value(row({0.1, 0.5, -0.3})) == doctest::Approx(1.0));
}

TEST_CASE("chi_from_psi_numeric at and near coincidence") {
  ScalarFunction psi = [](const ParticleConfig& X) { return std::sin(X(0, 0) - X(0, 1)); };
  // psi / (x_2 - x_1) = -sin(x_1 - x_2) / (x_1 - x_2) tends to -1
  CHECK(chi_from_psi_numeric(psi, row({0.3, 0.3})) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(chi_from_psi_numeric(psi, row({0.3, 0.3 + 1e-9})) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(chi_from_psi_numeric(psi, row({0.0, 1.0})) == doctest::Approx(std::sin(-1.0)));

  std::mt19937_64 rng(6);
  const auto poly = random_as_polynomial(3, 4, rng);
  const auto chi = chi_from_psi_poly(poly);
  ScalarFunction f = [&](const ParticleConfig& X) { return poly(X); };
  for (const auto& X : {row({0.2, -0.4, 0.7}), row({-0.6, 0.1, 0.9})})
    CHECK(chi_from_psi_numeric(f, X) == doctest::Approx(chi(X)).epsilon(1e-8));
  // one coincident pair costs one central difference
  CHECK(chi_from_psi_numeric(f, row({0.2, 0.2, 0.7})) == doctest::Approx(chi(row({0.2, 0.2, 0.7}))).epsilon(1e-5));
}

TEST_CASE("gsd_build_1d reconstructs psi") {
  std::mt19937_64 rng(7);
  for (int n = 2; n <= 5; ++n) {
    const auto psi = AsFunction::from_polynomial(random_as_polynomial(n, 5, rng));
    for (int s = 0; s < 10; ++s) {
      const ParticleConfig X = oracle::uniform_matrix(1, n, 1.0, rng);
      const GsdMatrix phi = gsd_build_1d(psi, X);
      CHECK(phi.col(1).transpose() == X.row(0));
      CHECK(rel(slater_det(phi), psi(X)) < 1e-8);
    }
  }
}

TEST_CASE("lex_sort_perm is stable") {
  ParticleConfig X(2, 4);
  X << 1, 0, 1, 0,
       2, 5, 2, -1;
  CHECK(lex_sort_perm(X).one_based() == std::vector<int>{4, 2, 1, 3});
}

TEST_CASE("gsd_build_nd puts one entry per column on the sorted pattern") {
  std::mt19937_64 rng(8);
  for (int d = 1; d <= 3; ++d)
    for (int n = 2; n <= 4; ++n) {
      const auto psi = oracle_antisymmetrized(n, d, random_smooth_function(n, d, rng));
      for (SignMode mode : {SignMode::FirstColumn, SignMode::NthRoot})
        for (int s = 0; s < 5; ++s) {
          const ParticleConfig X = oracle::uniform_matrix(d, n, 1.0, rng);
          const GsdMatrix phi = gsd_build_nd(psi, X, mode);
          const Permutation order = lex_sort_perm(X);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              if (j != order[i]) CHECK(phi(j, i) == 0.0);
          CHECK(rel(slater_det(phi), psi(X)) < 1e-8);
        }
    }
}

TEST_CASE("n = 2 continuous construction") {
  std::mt19937_64 rng(9);
  const auto psi = oracle_antisymmetrized(2, 3, random_smooth_function(2, 3, rng));
  const ParticleConfig X = oracle::uniform_matrix(3, 2, 1.0, rng);
  const GsdMatrix phi = n2_continuous_gsd(psi, X);
  CHECK(phi(0, 1) == 0.5);
  CHECK(slater_det(phi) == doctest::Approx(psi(X)).epsilon(1e-14));
  ParticleConfig Y = X;
  Y(0, 0) += 1e-9;
  CHECK((n2_continuous_gsd(psi, Y) - phi).cwiseAbs().maxCoeff() < 1e-7);
}
