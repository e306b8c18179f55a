// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "equisym/bases.hpp"
#include "equisym/experiments.hpp"
#include "oracles.hpp"

using namespace equisym;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Outcome newton_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    const auto pol = BasisDescriptor::polarized(n);
    const auto ele = BasisDescriptor::elementary(n);
    for (int s = 0; s < 500; ++s) {
      const ParticleConfig X = random_config(n, 1, 2.0, rng);
      const Eigen::VectorXd e = elementary_symmetric(ele, X);
      const Eigen::VectorXd viaNewton = newton_e_from_p(polarized_basis(pol, X));
      worst = std::max(worst, (viaNewton - e).cwiseAbs().maxCoeff() / std::max(1.0, e.cwiseAbs().maxCoeff()));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, fmt("max rel err %.3g, %.2f s", worst, secs)};
}

Outcome basis_counts() {
  int mismatches = 0;
  for (int n = 1; n <= 6; ++n)
    for (int d = 1; d <= 4; ++d) {
      const long long m = binomial(n + d, d) - 1;
      mismatches += BasisDescriptor::polarized(n, d).size() != m ? 1 : 0;
      mismatches += BasisDescriptor::elementary(n, d).size() != m ? 1 : 0;
      mismatches += static_cast<long long>(graded_multi_indices(d, 1, n).size()) != m ? 1 : 0;
      if (d == 1) mismatches += BasisDescriptor::polarized(n, 1).size() != n ? 1 : 0;
    }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over n <= 6, d <= 4"};
}

Outcome vandermonde_identity() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const SparsePolynomial delta = vandermonde_poly(n);
    for (int s = 0; s < 100; ++s) {
      const ParticleConfig X = random_config(n, 1, 1.0, rng);
      worst = std::max(worst, rel(delta(X), oracle::vandermonde_product(X.row(0).transpose())));
    }
  }
  return {worst <= 1e-12, fmt("max rel err %.3g", worst)};
}

Outcome gsd_1d_reconstruction() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  int not_fixed = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 4;
    const AsFunction psi = AsFunction::from_polynomial(random_as_polynomial(n, 6, rng));
    not_fixed += symmetrize_poly(*psi.chi()) == *psi.chi() ? 0 : 1;
    for (int s = 0; s < 100; ++s) {
      const ParticleConfig X = random_separated_config(n, 1.0, 0.1, rng);
      worst = std::max(worst, rel(slater_det(gsd_build_1d(psi, X)), psi(X)));
    }
  }
  return {worst <= 1e-8 && not_fixed == 0,
          fmt("max rel err %.3g, chi not a fixed point in %.0f of 50", worst, not_fixed)};
}

Outcome gsd_nd_reconstruction() {
  std::mt19937_64 rng(105);
  double worst = 0.0, off = 0.0;
  for (int n = 2; n <= 5; ++n)
    for (int d = 1; d <= 3; ++d) {
      const AsFunction psi = oracle_antisymmetrized(n, d, random_smooth_function(n, d, rng));
      for (int s = 0; s < 100; ++s) {
        const ParticleConfig X = random_config(n, d, 1.0, rng);
        const Permutation order = lex_sort_perm(X);
        const double expected = psi(X);
        for (SignMode mode : {SignMode::FirstColumn, SignMode::NthRoot}) {
          const GsdMatrix phi = gsd_build_nd(psi, X, mode);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              if (j != order[i]) off = std::max(off, std::abs(phi(j, i)));
          worst = std::max(worst, rel(slater_det(phi), expected));
        }
      }
    }
  return {worst <= 1e-8 && off == 0.0, fmt("max rel err %.3g, max off-pattern |entry| %.3g", worst, off)};
}

Outcome emlp_equivariance() {
  std::mt19937_64 rng(106);
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n)
    for (int d = 1; d <= 3; ++d) {
      const EmlpParams p = EmlpParams::random({d, 8, 8, 4}, Activation::Tanh, true, rng);
      const ParticleConfig X = random_config(n, d, 1.0, rng);
      const ParticleConfig Y = emlp_forward(p, X);
      for (const auto& perm : enumerate(n))
        worst = std::max(worst, (emlp_forward(p, apply(perm, X)) - apply(perm, Y)).cwiseAbs().maxCoeff());
    }
  // per-particle weights must not be equivariant
  const int n = 3;
  std::vector<EmlpLayer> channels;
  for (int i = 0; i < n; ++i) channels.push_back(EmlpParams::random({2, 6}, Activation::Tanh, false, rng).layers[0]);
  const ParticleConfig X = random_config(n, 2, 1.0, rng);
  const ParticleConfig Y = untied_emlp_layer(channels, Activation::Tanh, X);
  double untied = 0.0;
  for (const auto& perm : enumerate(n))
    untied = std::max(untied, (untied_emlp_layer(channels, Activation::Tanh, apply(perm, X)) - apply(perm, Y)).cwiseAbs().maxCoeff());
  return {worst <= 1e-12 && untied > 1e-6, fmt("tied max dev %.3g, untied max dev %.3g", worst, untied)};
}

Outcome head_symmetry() {
  std::mt19937_64 rng(107);
  double pool_dev = 0.0, anti_dev = 0.0;
  for (int n = 2; n <= 5; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      const ParticleConfig X1 = random_config(n, 1, 1.0, rng);
      const ParticleConfig X2 = random_config(n, 2, 1.0, rng);
      const auto mean = EquivariantModel::random(n, 2, {8, 8}, {HeadKind::MeanPool}, Activation::Tanh, rng);
      const auto vdm = EquivariantModel::random(n, 1, {8, 8}, {HeadKind::VandermondeProduct}, Activation::Tanh, rng);
      const auto fermi1 = EquivariantModel::random(n, 1, {8, 8}, {HeadKind::GsdHead}, Activation::Tanh, rng);
      const auto fermi2 = EquivariantModel::random(n, 2, {8, 8}, {HeadKind::GsdHead}, Activation::Tanh, rng);
      const double m0 = mean(X2);
      for (const auto& perm : enumerate(n)) pool_dev = std::max(pool_dev, std::abs(mean(apply(perm, X2)) - m0));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          std::vector<int> images(static_cast<std::size_t>(n));
          std::iota(images.begin(), images.end(), 0);
          std::swap(images[static_cast<std::size_t>(i)], images[static_cast<std::size_t>(j)]);
          const Permutation tau(images);
          for (const auto& [model, X] : {std::pair{&vdm, &X1}, std::pair{&fermi1, &X1}, std::pair{&fermi2, &X2}}) {
            const double f = (*model)(*X);
            anti_dev = std::max(anti_dev, std::abs((*model)(apply(tau, *X)) + f) / std::max(std::abs(f), 1e-300));
          }
        }
    }
  return {pool_dev <= 1e-12 && anti_dev <= 1e-11, fmt("mean-pool dev %.3g, transposition rel dev %.3g", pool_dev, anti_dev)};
}

Outcome approximant_bound() {
  int violations = 0;
  for (int n = 2; n <= 5; ++n)
    for (int d = 1; d <= 2; ++d) {
      ExperimentConfig c;
      c.experiment = "lemma4";
      c.n = n;
      c.d = d;
      c.seed = 108;
      const Report r = run(c);
      violations += r.metrics["violations"].get<int>();
    }
  return {violations == 0, std::to_string(violations) + " violating pairs over n in 2..5, d in 1..2"};
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(109);
  double worst = 0.0;
  for (HeadKind kind : {HeadKind::MeanPool, HeadKind::MaxPool, HeadKind::VandermondeProduct, HeadKind::GsdHead})
    for (int instance = 0; instance < 20; ++instance) {
      const int n = 2 + instance % 3;
      const int d = kind == HeadKind::VandermondeProduct ? 1 : 1 + instance % 2;
      const EquivariantModel model = EquivariantModel::random(n, d, {6, 5}, {kind}, Activation::Tanh, rng);
      const ParticleConfig X = random_config(n, d, 1.0, rng);
      const Eigen::VectorXd grad = flatten(backward(model, X, 1.0).grad);
      const Eigen::VectorXd fd = oracle::central_difference(
          [&](const Eigen::VectorXd& t) {
            EquivariantModel m = model;
            unflatten(m, t);
            return m(X);
          },
          flatten(model));
      worst = std::max(worst, (grad - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));
    }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 30.0, fmt("max scaled err %.3g, %.2f s", worst, secs)};
}

Outcome universality() {
  FitSettings sym = symmetric_fit_defaults();
  sym.train.seed = 1;
  const FitOutcome a = fit_symmetric(sym);

  FitSettings f1 = ferminet_fit_defaults(1);
  f1.train.seed = 1;
  const FitOutcome b = fit_ferminet(f1);

  FitSettings f2 = ferminet_fit_defaults(2);
  f2.train.seed = 1;
  const FitOutcome c = fit_ferminet(f2);

  const bool pass = a.test_mse <= 1e-3 && a.seconds <= 60.0 && b.relative_l2 <= 5e-2 && b.seconds <= 120.0 &&
                    c.test_mse <= 1e-1;
  return {pass, fmt("e2 mse %.3g; FermiNet d=1 rel L2 %.3g; d=2 mse %.3g", a.test_mse, b.relative_l2, c.test_mse) +
                    fmt(" (%.1f s, %.1f s, %.1f s)", a.seconds, b.seconds, c.seconds)};
}

Outcome bench_trend() {
  const auto rows = bench_bases({4, 8, 16, 32}, 1, 0);
  std::string detail;
  const bool ok = cost_growth_within(rows, "elementary", 2.0, &detail);
  return {ok, detail};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 newton-identities", newton_equivalence},
      {"2 basis-count", basis_counts},
      {"3 vandermonde-identity", vandermonde_identity},
      {"4 gsd-1d-reconstruction", gsd_1d_reconstruction},
      {"5 gsd-nd-reconstruction", gsd_nd_reconstruction},
      {"6 emlp-equivariance", emlp_equivariance},
      {"7 head-symmetry", head_symmetry},
      {"8 symmetrized-approximant-bound", approximant_bound},
      {"9 gradient-check", gradients},
      {"10 trained-universality", universality},
      {"11 elementary-cost-trend", bench_trend},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
