#include "equisym/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <mutex>
#include <thread>

#include "equisym/antisym.hpp"
#include "equisym/bases.hpp"

namespace equisym {

using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw DomainError("config: expected a flat JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") c.experiment = value.get<std::string>();
    else if (key == "n") c.n = value.get<int>();
    else if (key == "d") c.d = value.get<int>();
    else if (key == "D_box" || key == "box") c.box = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "tolerance") c.tolerance = value.get<double>();
    else if (key == "epochs") c.epochs = value.get<int>();
    else if (key == "lr") c.lr = value.get<double>();
    else if (key == "samples") c.samples = value.get<int>();
    else if (key == "psi") c.psi = value.get<std::string>();
    else if (key == "bench_n") c.bench_n = value.get<std::vector<int>>();
    else if (key == "out") c.out = value.get<std::string>();
    else throw DomainError("config: unknown key '" + key + "'");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {{"experiment", experiment}, {"D_box", box}, {"psi", psi}, {"bench_n", bench_n}};
  auto opt = [&](const char* key, const auto& v) { j[key] = v ? json(*v) : json(nullptr); };
  opt("n", n);
  opt("d", d);
  opt("seed", seed);
  opt("tolerance", tolerance);
  opt("epochs", epochs);
  opt("lr", lr);
  opt("samples", samples);
  return j;
}

void ExperimentConfig::validate() const {
  const auto& list = experiments();
  if (std::none_of(list.begin(), list.end(), [&](const ExperimentInfo& e) { return e.name == experiment; }))
    throw DomainError("unknown experiment '" + experiment + "'");
  if (n && *n < 1) throw DomainError("config: n must be >= 1");
  if (d && *d < 1) throw DomainError("config: d must be >= 1");
  if (!(box > 0.0)) throw DomainError("config: D_box must be > 0");
  if (samples && *samples < 0) throw DomainError("config: samples must be >= 0");
  if (epochs && *epochs < 1) throw DomainError("config: epochs must be >= 1");
}

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list{
      {"invariance", "basis families, EMLP pooling and the oracle under every permutation", false},
      {"newton", "Newton identities against the elementary symmetric expansion", false},
      {"gsd-1d", "Slater determinant reconstruction through Vandermonde division (d = 1)", false},
      {"gsd-nd", "sorted permuted-diagonal Slater determinant reconstruction (any d)", false},
      {"emlp-universality", "train EMLP + mean pooling on e_2", true},
      {"ferminet-fit", "train the toy FermiNet on an anti-symmetric target", true},
      {"bench-bases", "timing of polarized and elementary bases over n", false},
      {"lemma4", "symmetrizing an approximant never increases its sup error", false},
  };
  return list;
}

// ---------------------------------------------------------------------------
// utilities

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("EQUISYM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ParticleConfig random_config(int n, int d, double box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-box, box);
  ParticleConfig X(d, n);
  for (Eigen::Index k = 0; k < X.size(); ++k) X(k) = coord(rng);
  return X;
}

ParticleConfig random_separated_config(int n, double box, double gap, std::mt19937_64& rng) {
  if ((n - 1) * gap >= 2.0 * box) throw DomainError("random_separated_config: box too small for the gap");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    ParticleConfig X = random_config(n, 1, box, rng);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < i && ok; ++j) ok = std::abs(X(0, i) - X(0, j)) >= gap;
    if (ok) return X;
  }
  throw DomainError("random_separated_config: rejection sampling failed");
}

double target_e2(const ParticleConfig& X) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    for (Eigen::Index j = i + 1; j < X.cols(); ++j) sum += X(0, i) * X(0, j);
  return sum;
}

double target_delta_p2(const ParticleConfig& X) { return vandermonde(X.row(0)) * X.row(0).squaredNorm(); }

double target_slater_2d(const ParticleConfig& X) {
  Eigen::Matrix3d M;
  for (int j = 0; j < 3; ++j) M.row(j) << 1.0, X(0, j), X(1, j);
  return M.determinant() * (1.0 + 0.25 * X.squaredNorm());
}

namespace {

std::string perm_label(const Permutation& p) {
  std::string s;
  for (int v : p.one_based()) s += (s.empty() ? "" : " ") + std::to_string(v);
  return s;
}

double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

std::uint64_t seed_or_default(const ExperimentConfig& c) { return c.seed.value_or(0); }

// ---------------------------------------------------------------------------
// suites

Report run_invariance(const ExperimentConfig& c) {
  const int n = c.n.value_or(4), d = c.d.value_or(1);
  if (n > kMaxOracleN) throw OracleSizeError("invariance: n <= 10 required");
  const double tol = c.tolerance.value_or(1e-12);
  std::mt19937_64 rng(seed_or_default(c));
  const ParticleConfig X = random_config(n, d, c.box, rng);

  struct Family {
    std::string name;
    std::function<Eigen::VectorXd(const ParticleConfig&)> eval;
  };
  std::vector<Family> families;
  const auto pol = BasisDescriptor::polarized(n, d);
  const auto ele = BasisDescriptor::elementary(n, d);
  families.push_back({"polarized", [pol](const ParticleConfig& Y) { return basis_vector(pol, Y); }});
  families.push_back({"elementary", [ele](const ParticleConfig& Y) { return basis_vector(ele, Y); }});
  if (d == 1) families.push_back({"sorting", [](const ParticleConfig& Y) { return sorting_basis(Y); }});
  if (n <= 6) {
    const auto sym = BasisDescriptor::symmetrized_monomial(n, 3, d);
    families.push_back({"symmetrized-monomial", [sym](const ParticleConfig& Y) { return basis_vector(sym, Y); }});
  }
  const auto model = EquivariantModel::random(n, d, {8, 8}, {HeadKind::MeanPool}, Activation::Tanh, rng);
  families.push_back({"emlp-mean", [model](const ParticleConfig& Y) {
                        return Eigen::VectorXd::Constant(1, model_forward(model, Y));
                      }});
  if (n <= 6) {
    const ScalarFunction f = random_smooth_function(n, d, rng);
    families.push_back({"oracle-symmetrize", [f](const ParticleConfig& Y) {
                          return Eigen::VectorXd::Constant(1, symmetrize(f, Y));
                        }});
  }

  std::vector<Eigen::VectorXd> reference;
  for (const auto& f : families) reference.push_back(f.eval(X));

  Report r;
  r.columns = {"permutation", "parity"};
  for (const auto& f : families) r.columns.push_back(f.name);
  std::vector<double> worst(families.size(), 0.0);
  for_each_permutation(n, [&](const Permutation& p) {
    const ParticleConfig PX = apply(p, X);
    std::vector<std::string> row{perm_label(p), std::to_string(p.parity())};
    for (std::size_t k = 0; k < families.size(); ++k) {
      const double dev = (families[k].eval(PX) - reference[k]).cwiseAbs().maxCoeff();
      worst[k] = std::max(worst[k], dev);
      row.push_back(format_double(dev));
    }
    r.add_row(std::move(row));
  });
  for (std::size_t k = 0; k < families.size(); ++k) {
    r.metrics["max_deviation"][families[k].name] = worst[k];
    if (worst[k] > tol) r.fail(families[k].name + " changed by " + format_double(worst[k]) + " under a permutation");
  }
  return r;
}

Report run_newton(const ExperimentConfig& c) {
  const int n = c.n.value_or(8);
  if (c.d.value_or(1) != 1) throw DomainError("newton: d = 1 only");
  const int samples = c.samples.value_or(200);
  const double tol = c.tolerance.value_or(1e-9);
  const double box = c.box == 1.0 ? 2.0 : c.box;
  std::mt19937_64 rng(seed_or_default(c));
  const auto pol = BasisDescriptor::polarized(n);
  const auto ele = BasisDescriptor::elementary(n);
  Report r;
  r.columns = {"sample", "max_abs_error", "relative_error"};
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ParticleConfig X = random_config(n, 1, box, rng);
    const Eigen::VectorXd direct = elementary_symmetric(ele, X);
    const Eigen::VectorXd newton = newton_e_from_p(polarized_basis(pol, X));
    const double abs_err = (newton - direct).cwiseAbs().maxCoeff();
    const double rel = abs_err / std::max(1.0, direct.cwiseAbs().maxCoeff());
    worst = std::max(worst, rel);
    r.add_row({std::to_string(s), format_double(abs_err), format_double(rel)});
  }
  r.metrics["max_relative_error"] = worst;
  if (worst > tol) r.fail("Newton round trip error " + format_double(worst) + " > " + format_double(tol));
  return r;
}

Report run_gsd_1d(const ExperimentConfig& c) {
  const int n = c.n.value_or(4);
  if (c.d.value_or(1) != 1) throw DomainError("gsd-1d: d = 1 only");
  const int samples = c.samples.value_or(100);
  std::mt19937_64 rng(seed_or_default(c));
  SparsePolynomial psi_poly(n, 1);
  if (c.psi == "delta")
    psi_poly = vandermonde_poly(n);
  else if (c.psi == "random")
    psi_poly = random_as_polynomial(n, 6, rng);
  else
    throw DomainError("gsd-1d: psi must be 'delta' or 'random'");
  const double tol = c.tolerance.value_or(c.psi == "delta" ? 1e-10 : 1e-8);
  const AsFunction psi = AsFunction::from_polynomial(psi_poly);
  const bool chi_symmetric = is_symmetric(*psi.chi());

  std::vector<ParticleConfig> points;
  for (int s = 0; s < samples; ++s) points.push_back(random_separated_config(n, c.box, 0.1 * c.box, rng));
  std::vector<std::array<double, 3>> results(points.size());
  parallel_for(samples, [&](int s) {
    const auto& X = points[static_cast<std::size_t>(s)];
    const double expected = psi(X);
    const double det = slater_det(gsd_build_1d(psi, X));
    results[static_cast<std::size_t>(s)] = {expected, det, relative_error(det, expected)};
  });

  Report r;
  r.columns = {"sample", "psi", "det", "relative_error"};
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto& [expected, det, rel] = results[static_cast<std::size_t>(s)];
    worst = std::max(worst, rel);
    r.add_row({std::to_string(s), format_double(expected), format_double(det), format_double(rel)});
  }
  r.metrics["max_relative_error"] = worst;
  r.metrics["chi_terms"] = psi.chi()->size();
  r.metrics["chi_symmetric"] = chi_symmetric;
  if (worst > tol) r.fail("reconstruction error " + format_double(worst) + " > " + format_double(tol));
  if (!chi_symmetric) r.fail("chi is not symmetric");
  return r;
}

Report run_gsd_nd(const ExperimentConfig& c) {
  const int n = c.n.value_or(3), d = c.d.value_or(2);
  if (n > 6) throw OracleSizeError("gsd-nd: oracle anti-symmetrization limited to n <= 6 here");
  const int samples = c.samples.value_or(100);
  const double tol = c.tolerance.value_or(1e-8);
  std::mt19937_64 rng(seed_or_default(c));
  const AsFunction psi = oracle_antisymmetrized(n, d, random_smooth_function(n, d, rng));
  std::vector<ParticleConfig> points;
  for (int s = 0; s < samples; ++s) points.push_back(random_config(n, d, c.box, rng));

  struct Row {
    double psi, det_first, det_root, rel_first, rel_root, off_pattern;
  };
  std::vector<Row> rows(points.size());
  parallel_for(samples, [&](int s) {
    const auto& X = points[static_cast<std::size_t>(s)];
    const double expected = psi(X);
    const Permutation order = lex_sort_perm(X);
    double off = 0.0;
    Row row{expected, 0, 0, 0, 0, 0};
    for (SignMode mode : {SignMode::FirstColumn, SignMode::NthRoot}) {
      const GsdMatrix phi = gsd_build_nd(psi, X, mode);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (j != order[i]) off = std::max(off, std::abs(phi(j, i)));
      const double det = slater_det(phi);
      (mode == SignMode::FirstColumn ? row.det_first : row.det_root) = det;
      (mode == SignMode::FirstColumn ? row.rel_first : row.rel_root) = relative_error(det, expected);
    }
    row.off_pattern = off;
    rows[static_cast<std::size_t>(s)] = row;
  });

  Report r;
  r.columns = {"sample", "psi", "det_first_column", "det_nth_root", "rel_err_first_column", "rel_err_nth_root",
               "off_pattern_max"};
  double worst = 0.0, off = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Row& row = rows[static_cast<std::size_t>(s)];
    worst = std::max({worst, row.rel_first, row.rel_root});
    off = std::max(off, row.off_pattern);
    r.add_row({std::to_string(s), format_double(row.psi), format_double(row.det_first), format_double(row.det_root),
               format_double(row.rel_first), format_double(row.rel_root), format_double(row.off_pattern)});
  }
  r.metrics["max_relative_error"] = worst;
  r.metrics["max_off_pattern"] = off;
  if (worst > tol) r.fail("reconstruction error " + format_double(worst) + " > " + format_double(tol));
  if (off != 0.0) r.fail("nonzero entry off the sorted diagonal pattern");
  return r;
}

void add_trace(Report& r, const std::vector<double>& trace) {
  r.columns = {"epoch", "train_mse"};
  for (std::size_t e = 0; e < trace.size(); ++e) r.add_row({std::to_string(e + 1), format_double(trace[e])});
}

Report run_emlp_universality(const ExperimentConfig& c) {
  FitSettings s = symmetric_fit_defaults();
  s.n = c.n.value_or(3);
  if (c.d.value_or(1) != 1) throw DomainError("emlp-universality: the e_2 target is d = 1");
  s.box = c.box;
  s.train.seed = *c.seed;
  if (c.epochs) s.train.epochs = *c.epochs;
  if (c.lr) s.train.lr = *c.lr;
  if (c.samples) s.train_size = *c.samples;
  const double tol = c.tolerance.value_or(1e-3);
  const FitOutcome out = fit_symmetric(s);
  Report r;
  add_trace(r, out.loss_trace);
  r.metrics = {{"test_mse", out.test_mse}, {"relative_l2", out.relative_l2},
               {"invariance_defect", out.symmetry_defect}, {"epochs", out.loss_trace.size()}};
  if (out.test_mse > tol) r.fail("test MSE " + format_double(out.test_mse) + " > " + format_double(tol));
  if (out.symmetry_defect > 1e-12) r.fail("EMLP + mean pooling is not invariant");
  return r;
}

Report run_ferminet_fit(const ExperimentConfig& c) {
  const int d = c.d.value_or(1);
  if (d > 2) throw DomainError("ferminet-fit: targets exist for d = 1 and d = 2");
  FitSettings s = ferminet_fit_defaults(d);
  s.n = c.n.value_or(3);
  if (d == 2 && s.n != 3) throw DomainError("ferminet-fit: the d = 2 target needs n = 3");
  s.box = c.box;
  s.train.seed = *c.seed;
  if (c.epochs) s.train.epochs = *c.epochs;
  if (c.lr) s.train.lr = *c.lr;
  if (c.samples) s.train_size = *c.samples;
  const FitOutcome out = fit_ferminet(s);
  Report r;
  add_trace(r, out.loss_trace);
  r.metrics = {{"final_mse", out.test_mse},         {"relative_l2", out.relative_l2},
               {"sign_accuracy", out.sign_accuracy}, {"as_defect", out.symmetry_defect},
               {"epochs", out.loss_trace.size()}};
  if (d == 1) {
    const double tol = c.tolerance.value_or(5e-2);
    if (out.relative_l2 > tol) r.fail("relative L2 error " + format_double(out.relative_l2) + " > " + format_double(tol));
  } else {
    const double tol = c.tolerance.value_or(1e-1);
    if (out.test_mse > tol) r.fail("test MSE " + format_double(out.test_mse) + " > " + format_double(tol));
  }
  if (out.symmetry_defect > 1e-12) r.fail("FermiNet output is not anti-symmetric");
  return r;
}

Report run_bench_bases(const ExperimentConfig& c) {
  const int d = c.d.value_or(1);
  const auto rows = bench_bases(c.bench_n, d, seed_or_default(c));
  Report r;
  r.columns = {"family", "n", "d", "m", "mean_ns", "median_ns"};
  for (const auto& row : rows)
    r.add_row({row.family, std::to_string(row.n), std::to_string(row.d), std::to_string(row.m),
               format_double(row.mean_ns), format_double(row.median_ns)});
  std::string detail;
  const bool ok = cost_growth_within(rows, "elementary", 2.0, &detail);
  r.metrics["elementary_growth_within_n_m"] = ok;
  r.metrics["growth_detail"] = detail;
  if (!ok) r.fail("elementary_symmetric cost grew faster than n*m: " + detail);
  return r;
}

Report run_lemma4(const ExperimentConfig& c) {
  const int n = c.n.value_or(3), d = c.d.value_or(1);
  if (n > 5) throw OracleSizeError("lemma4: n <= 5 required");
  const int pairs = 20;
  const int points = c.samples.value_or(1000);
  std::mt19937_64 rng(seed_or_default(c));
  const auto pol = BasisDescriptor::polarized(n, d);

  struct Pair {
    Eigen::VectorXd a;
    MlpParams g;
  };
  std::vector<Pair> setup;
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd a(pol.size());
    for (Eigen::Index b = 0; b < a.size(); ++b) a(b) = coef(rng);
    setup.push_back({a, MlpParams::random({n * d, 16, 1}, Activation::Tanh, true, rng)});
  }
  std::vector<ParticleConfig> sample;
  for (int s = 0; s < points; ++s) sample.push_back(random_config(n, d, c.box, rng));
  const auto perms = enumerate(n);

  std::vector<std::array<double, 2>> result(static_cast<std::size_t>(pairs));
  parallel_for(pairs, [&](int k) {
    const Pair& pr = setup[static_cast<std::size_t>(k)];
    auto f = [&](const ParticleConfig& X) { return std::tanh(pr.a.dot(polarized_basis(pol, X))); };
    ScalarFunction g = [&](const ParticleConfig& X) {
      return mlp_forward(pr.g, Eigen::Map<const Eigen::VectorXd>(X.data(), X.size()))(0);
    };
    double lhs = 0.0, rhs = 0.0;
    for (const auto& X : sample) {
      lhs = std::max(lhs, std::abs(f(X) - symmetrize_approximant(g, X)));
      // the sup of |f - g| runs over the orbit of every sampled point
      for (const auto& p : perms) {
        const ParticleConfig PX = apply(p, X);
        rhs = std::max(rhs, std::abs(f(PX) - g(PX)));
      }
    }
    result[static_cast<std::size_t>(k)] = {lhs, rhs};
  });

  Report r;
  r.columns = {"pair", "sup_f_minus_gbar", "sup_f_minus_g", "holds"};
  int violations = 0;
  for (int k = 0; k < pairs; ++k) {
    const auto [lhs, rhs] = result[static_cast<std::size_t>(k)];
    const bool holds = lhs <= rhs + 1e-12;
    violations += holds ? 0 : 1;
    r.add_row({std::to_string(k), format_double(lhs), format_double(rhs), holds ? "1" : "0"});
  }
  r.metrics["violations"] = violations;
  if (violations) r.fail(std::to_string(violations) + " pairs violate sup|f - gbar| <= sup|f - g|");
  return r;
}

} // namespace

// ---------------------------------------------------------------------------
// training problems

FitSettings symmetric_fit_defaults() {
  FitSettings s;
  s.hidden = {32, 32};
  s.train.optimizer = Optimizer::Adam;
  s.train.lr = 3e-3;
  s.train.final_lr_fraction = 0.03;
  s.train.epochs = 300;
  s.train.batch = 32;
  return s;
}

FitSettings ferminet_fit_defaults(int d) {
  FitSettings s;
  s.d = d;
  s.hidden = {32, 32};
  s.train.optimizer = Optimizer::Adam;
  s.train.lr = 3e-3;
  s.train.final_lr_fraction = 0.03;
  s.train.epochs = 300;
  s.train.batch = 32;
  return s;
}

namespace {

FitOutcome fit_model(const FitSettings& s, HeadKind head, const std::function<double(const ParticleConfig&)>& target) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 data_rng(s.train.seed);
  std::mt19937_64 init_rng(s.train.seed ^ 0x9e3779b97f4a7c15ULL);
  auto make = [&](int count) {
    std::vector<ParticleSample> data;
    for (int k = 0; k < count; ++k) {
      ParticleConfig X = random_config(s.n, s.d, s.box, data_rng);
      const double t = target(X);
      data.push_back({std::move(X), t});
    }
    return data;
  };
  const auto train_set = make(s.train_size);
  const auto test_set = make(s.test_size);
  EquivariantModel model = EquivariantModel::random(s.n, s.d, s.hidden, {head}, Activation::Tanh, init_rng);
  auto result = train(std::move(model), train_set, s.train);

  FitOutcome out;
  out.model = std::move(result.model);
  out.loss_trace = std::move(result.loss_trace);
  double se = 0.0, norm = 0.0;
  int sign_ok = 0;
  for (const auto& sample : test_set) {
    const double f = model_forward(out.model, sample.X);
    se += (f - sample.target) * (f - sample.target);
    norm += sample.target * sample.target;
    sign_ok += (f > 0) == (sample.target > 0) ? 1 : 0;
  }
  out.test_mse = se / static_cast<double>(test_set.size());
  out.relative_l2 = std::sqrt(se / std::max(norm, 1e-300));
  out.sign_accuracy = static_cast<double>(sign_ok) / static_cast<double>(test_set.size());

  const bool anti = head == HeadKind::GsdHead || head == HeadKind::VandermondeProduct;
  const auto perms = enumerate(s.n);
  double defect = 0.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(100, test_set.size()); ++k) {
    const auto& X = test_set[k].X;
    const double f = model_forward(out.model, X);
    for (const auto& p : perms) {
      const double fp = model_forward(out.model, apply(p, X));
      const double dev = anti ? std::abs(fp - p.parity() * f) / std::max(1.0, std::abs(f)) : std::abs(fp - f);
      defect = std::max(defect, dev);
    }
  }
  out.symmetry_defect = defect;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace

FitOutcome fit_symmetric(const FitSettings& settings) {
  if (settings.d != 1) throw DomainError("fit_symmetric: e_2 target is d = 1");
  return fit_model(settings, HeadKind::MeanPool, target_e2);
}

FitOutcome fit_ferminet(const FitSettings& settings) {
  if (settings.d == 1) return fit_model(settings, HeadKind::GsdHead, target_delta_p2);
  if (settings.d == 2 && settings.n == 3) return fit_model(settings, HeadKind::GsdHead, target_slater_2d);
  throw DomainError("fit_ferminet: targets exist for d = 1 and for n = 3, d = 2");
}

// ---------------------------------------------------------------------------
// timing

std::vector<BenchRow> bench_bases(const std::vector<int>& ns, int d, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  constexpr int kWarmup = 3, kReps = 11, kBatch = 64;
  std::mt19937_64 rng(seed);
  std::vector<BenchRow> rows;
  for (const std::string family : {"polarized", "elementary"}) {
    for (int n : ns) {
      const BasisDescriptor desc =
          family == "polarized" ? BasisDescriptor::polarized(n, d) : BasisDescriptor::elementary(n, d);
      std::vector<ParticleConfig> inputs;
      for (int k = 0; k < kBatch; ++k) inputs.push_back(random_config(n, d, 1.0, rng));
      // repeat cheap cases so each timed batch lasts long enough to measure
      const int repeat = std::max(1, 20000 / (n * desc.size() * d));
      volatile double sink = 0.0;
      std::vector<double> times;
      for (int rep = 0; rep < kWarmup + kReps; ++rep) {
        const auto t0 = clock::now();
        for (int r = 0; r < repeat; ++r)
          for (const auto& X : inputs) sink = sink + basis_vector(desc, X)(0);
        const double ns_per_eval =
            std::chrono::duration<double, std::nano>(clock::now() - t0).count() / (repeat * kBatch);
        if (rep >= kWarmup) times.push_back(ns_per_eval);
      }
      BenchRow row{family, n, d, desc.size(), 0.0, 0.0};
      for (double t : times) row.mean_ns += t / kReps;
      std::sort(times.begin(), times.end());
      row.median_ns = times[kReps / 2];
      rows.push_back(row);
    }
  }
  return rows;
}

bool cost_growth_within(const std::vector<BenchRow>& rows, const std::string& family, double slack,
                        std::string* detail) {
  std::vector<BenchRow> sel;
  for (const auto& r : rows)
    if (r.family == family) sel.push_back(r);
  std::sort(sel.begin(), sel.end(), [](const BenchRow& a, const BenchRow& b) { return a.n < b.n; });
  bool ok = true;
  std::ostringstream os;
  for (std::size_t k = 1; k < sel.size(); ++k) {
    const double measured = sel[k].median_ns / sel[k - 1].median_ns;
    const double allowed = slack * (static_cast<double>(sel[k].n) * sel[k].m) / (static_cast<double>(sel[k - 1].n) * sel[k - 1].m);
    os << (k > 1 ? "; " : "") << "n " << sel[k - 1].n << "->" << sel[k].n << ": x" << format_double(measured)
       << " (allowed x" << format_double(allowed) << ")";
    ok = ok && measured <= allowed;
  }
  if (detail) *detail = os.str();
  return ok;
}

// ---------------------------------------------------------------------------

Report run(const ExperimentConfig& config) {
  config.validate();
  const auto& list = experiments();
  const auto info = std::find_if(list.begin(), list.end(), [&](const ExperimentInfo& e) { return e.name == config.experiment; });
  if (info->needs_seed && !config.seed)
    throw DomainError("experiment '" + config.experiment + "' trains a model and needs an explicit --seed");

  Report r;
  if (config.experiment == "invariance") r = run_invariance(config);
  else if (config.experiment == "newton") r = run_newton(config);
  else if (config.experiment == "gsd-1d") r = run_gsd_1d(config);
  else if (config.experiment == "gsd-nd") r = run_gsd_nd(config);
  else if (config.experiment == "emlp-universality") r = run_emlp_universality(config);
  else if (config.experiment == "ferminet-fit") r = run_ferminet_fit(config);
  else if (config.experiment == "bench-bases") r = run_bench_bases(config);
  else r = run_lemma4(config);
  r.experiment = config.experiment;
  r.config = config.to_json();
  return r;
}

} // namespace equisym
