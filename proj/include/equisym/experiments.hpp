#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "equisym/networks.hpp"
#include "equisym/report.hpp"

namespace equisym {

/// Settings of one experiment run. Unset optionals take the experiment's
/// defaults; `seed` has no default for training experiments.
struct ExperimentConfig {
  std::string experiment;
  std::optional<int> n;
  std::optional<int> d;
  double box = 1.0;  ///< test hypercube [-box, box]^{n d}
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> samples;
  std::string psi = "delta";  ///< gsd-1d: "delta" or "random"
  std::vector<int> bench_n{4, 8, 16, 32};
  std::string out = ".";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  bool needs_seed;
};

const std::vector<ExperimentInfo>& experiments();

/// Runs the named suite; Report::passed is true iff every check held.
Report run(const ExperimentConfig& config);

/// Worker count from EQUISYM_THREADS (default: hardware concurrency).
int worker_count();

/// Calls fn(i) for i in [0, count) on up to worker_count() threads. Callers
/// store results by index, so output order never depends on scheduling.
void parallel_for(int count, const std::function<void(int)>& fn);

/// Uniform configuration in [-box, box]^{d x n}.
ParticleConfig random_config(int n, int d, double box, std::mt19937_64& rng);
/// d = 1 configuration whose coordinates are pairwise at least `gap` apart.
ParticleConfig random_separated_config(int n, double box, double gap, std::mt19937_64& rng);

/// Training targets.
double target_e2(const ParticleConfig& X);          ///< e_2, d = 1
double target_delta_p2(const ParticleConfig& X);    ///< Delta * p_2, d = 1
double target_slater_2d(const ParticleConfig& X);   ///< det[1, x_j, y_j] (1 + |X|^2 / 4), n = 3, d = 2

struct FitSettings {
  int n = 3;
  int d = 1;
  double box = 1.0;
  int train_size = 2000;
  int test_size = 1000;
  std::vector<int> hidden{32, 32};
  TrainConfig train;
};

struct FitOutcome {
  EquivariantModel model;
  std::vector<double> loss_trace;
  double test_mse = 0.0;
  double relative_l2 = 0.0;      ///< sqrt(sum (f - t)^2 / sum t^2) on the test set
  double sign_accuracy = 1.0;    ///< fraction of test points with sign(f) = sign(t)
  double symmetry_defect = 0.0;  ///< invariance (pool heads) or sign-flip (AS heads) defect
  double seconds = 0.0;
};

/// Default settings for the symmetric e_2 fit and the FermiNet fits.
FitSettings symmetric_fit_defaults();
FitSettings ferminet_fit_defaults(int d);

/// EMLP + mean pool trained on e_2.
FitOutcome fit_symmetric(const FitSettings& settings);
/// Toy FermiNet (EMLP + GSD head) trained on target_delta_p2 (d = 1) or
/// target_slater_2d (d = 2).
FitOutcome fit_ferminet(const FitSettings& settings);

/// Median elementary_symmetric time (ns per evaluation) over 11 repetitions
/// after 3 warmups.
struct BenchRow {
  std::string family;
  int n = 0;
  int d = 1;
  int m = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
};
std::vector<BenchRow> bench_bases(const std::vector<int>& ns, int d, std::uint64_t seed);

/// Checks t(n2)/t(n1) <= slack * (n2 m2)/(n1 m1) for consecutive rows of one family.
bool cost_growth_within(const std::vector<BenchRow>& rows, const std::string& family, double slack,
                        std::string* detail = nullptr);

} // namespace equisym
