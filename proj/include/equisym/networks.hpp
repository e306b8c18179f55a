#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equisym/antisym.hpp"
#include "equisym/permutation.hpp"

namespace equisym {

enum class Activation { Tanh, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd u;
};

/// Plain MLP: x -> sigma(W x + u) layer by layer; the last nonlinearity is
/// dropped when final_linear is set.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::Tanh;
  bool final_linear = true;

  /// widths = {d_0, d_1, ..., d_L}; Glorot-uniform weights, zero biases.
  static MlpParams random(const std::vector<int>& widths, Activation activation, bool final_linear,
                          std::mt19937_64& rng);

  int input_size() const;
  int output_size() const;
  void validate() const;
};

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x);

/// One EMLP layer: x_i -> sigma(W x_i + V sum_{j != i} x_j + u), tied across
/// all particles. With mixing = false the V term is skipped (and gets no
/// gradient), which gives a per-particle ("factored") layer.
struct EmlpLayer {
  Eigen::MatrixXd W;
  Eigen::MatrixXd V;
  Eigen::VectorXd u;
  bool mixing = true;
};

struct EmlpParams {
  std::vector<EmlpLayer> layers;
  Activation activation = Activation::Tanh;
  bool final_linear = true;

  static EmlpParams random(const std::vector<int>& widths, Activation activation, bool final_linear,
                           std::mt19937_64& rng);

  int input_dim() const;
  int output_dim() const;
  void validate() const;
};

/// d' x n output; column i depends on x_i and on the sum of the others.
ParticleConfig emlp_forward(const EmlpParams& p, const ParticleConfig& X);

/// Per-particle weights: channel i uses layers[i]. Not equivariant in
/// general; exists to witness that weight tying is what makes the layer
/// equivariant.
ParticleConfig untied_emlp_layer(const std::vector<EmlpLayer>& per_channel, Activation activation,
                                 const ParticleConfig& X);

enum class HeadKind { MeanPool, MaxPool, VandermondeProduct, GsdHead };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

struct HeadSpec {
  HeadKind kind = HeadKind::MeanPool;
};

/// Checks the head's shape requirements for d' x n output from d-dim input.
void validate_head(HeadSpec head, int d, int d_out, int n);

/// (1/n) sum_i y_i or the elementwise max over particles; any d'.
Eigen::VectorXd pool(HeadKind kind, const Eigen::MatrixXd& Y);

/// Scalar output of a head on EMLP output Y (d' x n) for input X.
///   MeanPool, MaxPool:   pooled value, d' = 1
///   VandermondeProduct:  mean_i(y_i) * prod_{j<i}(x_i - x_j), d = d' = 1
///   GsdHead:             det(Phi) with Phi(j, i) = Y(i, j), d' = n
double head_apply(HeadSpec head, const Eigen::MatrixXd& Y, const ParticleConfig& X);

/// EMLP followed by a head: symmetric (pool heads) or anti-symmetric.
/// GsdHead over an EMLP is the toy FermiNet.
struct EquivariantModel {
  EmlpParams emlp;
  HeadSpec head;
  int n = 1;

  static EquivariantModel random(int n, int d, const std::vector<int>& hidden, HeadSpec head, Activation activation,
                                 std::mt19937_64& rng);

  double operator()(const ParticleConfig& X) const;
  void validate() const;
};

double model_forward(const EquivariantModel& model, const ParticleConfig& X);

struct ModelGradient {
  double output = 0.0;
  EmlpParams grad;             ///< same shapes as the model's parameters
  double det_condition = 1.0;  ///< GsdHead only
  DetGradient::Method det_method = DetGradient::Method::LuInverse;
};

/// Reverse-mode gradient of loss w.r.t. every W, V, u, given
/// loss_grad = dLoss/dOutput.
ModelGradient backward(const EquivariantModel& model, const ParticleConfig& X, double loss_grad);

/// Gradient of <out_grad, mlp_forward(p, x)> w.r.t. all W and u.
MlpParams mlp_backward(const MlpParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& out_grad);

/// Flat parameter vectors, layer by layer: W (row-major), V (row-major), u.
Eigen::VectorXd flatten(const EmlpParams& p);
void unflatten(EmlpParams& p, const Eigen::VectorXd& theta);
Eigen::VectorXd flatten(const MlpParams& p);
void unflatten(MlpParams& p, const Eigen::VectorXd& theta);
Eigen::VectorXd flatten(const EquivariantModel& m);
void unflatten(EquivariantModel& m, const Eigen::VectorXd& theta);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  Optimizer optimizer = Optimizer::Adam;
  double lr = 1e-3;
  /// Learning rate decays geometrically to lr * final_lr_fraction at the last epoch.
  double final_lr_fraction = 1.0;
  int epochs = 100;
  int batch = 32;
  std::uint64_t seed = 0;
  /// Stops early once exceeded; results then depend on machine speed.
  double max_seconds = std::numeric_limits<double>::infinity();
};

struct ParticleSample {
  ParticleConfig X;
  double target = 0.0;
};

struct VectorSample {
  Eigen::VectorXd x;
  Eigen::VectorXd target;
};

template <typename Model>
struct TrainResult {
  Model model;
  std::vector<double> loss_trace;  ///< mean squared error per epoch
  int epochs_run = 0;
};

/// Minibatch training on mean squared error. Shuffling is driven by
/// config.seed; the same model, data and config give the same result.
/// Throws TrainingError on a non-finite loss.
TrainResult<EquivariantModel> train(EquivariantModel model, const std::vector<ParticleSample>& data,
                                    const TrainConfig& config);
TrainResult<MlpParams> train(MlpParams model, const std::vector<VectorSample>& data, const TrainConfig& config);

double mean_squared_error(const EquivariantModel& model, const std::vector<ParticleSample>& data);

/// MLP outer function g fitted to (beta(X), target) pairs; rows of features
/// are basis vectors.
TrainResult<MlpParams> fit_outer_mlp(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                     const std::vector<int>& hidden, const TrainConfig& config);

enum class TargetSymmetry { Symmetric, Antisymmetric };

/// Group average of a scalar approximant: plain mean over all p for a
/// symmetric target, parity-weighted for an anti-symmetric one.
double symmetrize_approximant(const ScalarFunction& g, const ParticleConfig& X,
                              TargetSymmetry symmetry = TargetSymmetry::Symmetric);

using MatrixFunction = std::function<Eigen::MatrixXd(const ParticleConfig&)>;

/// Equivariant average: (1/n!) sum_p p^{-1} G(p X), permuting output columns back.
Eigen::MatrixXd symmetrize_approximant(const MatrixFunction& G, const ParticleConfig& X);

} // namespace equisym
