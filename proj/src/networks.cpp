#include "equisym/networks.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace equisym {

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw DomainError("unknown activation '" + name + "'");
}

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::MeanPool: return "mean";
    case HeadKind::MaxPool: return "max";
    case HeadKind::VandermondeProduct: return "vandermonde";
    case HeadKind::GsdHead: return "gsd";
  }
  return "unknown";
}

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "mean") return HeadKind::MeanPool;
  if (name == "max") return HeadKind::MaxPool;
  if (name == "vandermonde") return HeadKind::VandermondeProduct;
  if (name == "gsd") return HeadKind::GsdHead;
  throw DomainError("unknown head '" + name + "'");
}

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& Z) {
  return a == Activation::Tanh ? Eigen::MatrixXd(Z.array().tanh()) : Eigen::MatrixXd(Z.cwiseMax(0.0));
}

// dA/dZ evaluated from the pre-activation
Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& Z) {
  if (a == Activation::Tanh) return (1.0 - Z.array().tanh().square()).matrix();
  return (Z.array() > 0.0).cast<double>().matrix();
}

Eigen::MatrixXd glorot(int rows, int cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Eigen::MatrixXd W(rows, cols);
  for (Eigen::Index k = 0; k < W.size(); ++k) W(k) = dist(rng);
  return W;
}

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2) throw ShapeError("network needs at least input and output widths");
  for (int w : widths)
    if (w < 1) throw ShapeError("network widths must be >= 1");
}

struct MlpTape {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd output;
};

MlpTape mlp_record(const MlpParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.input_size())
    throw ShapeError("mlp_forward: input of length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(p.input_size()));
  MlpTape tape;
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    tape.inputs.push_back(h);
    Eigen::VectorXd z = p.layers[l].W * h + p.layers[l].u;
    const bool linear = p.final_linear && l + 1 == p.layers.size();
    h = linear ? z : Eigen::VectorXd(activate(p.activation, z));
    tape.pre.push_back(std::move(z));
  }
  tape.output = h;
  return tape;
}

struct EmlpTape {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> others;  // sum_{j != i} x_j per column
  std::vector<Eigen::MatrixXd> pre;
  Eigen::MatrixXd output;
};

// Sums over particles go through ordered_sum so that permuting the columns of
// h gives bitwise the same totals.
Eigen::VectorXd particle_sum(const Eigen::MatrixXd& h) {
  Eigen::VectorXd total(h.rows());
  std::vector<double> values(static_cast<std::size_t>(h.cols()));
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index i = 0; i < h.cols(); ++i) values[static_cast<std::size_t>(i)] = h(r, i);
    total(r) = ordered_sum(values);
  }
  return total;
}

double particle_mean(const Eigen::MatrixXd& y) { return particle_sum(y)(0) / static_cast<double>(y.cols()); }

EmlpTape emlp_record(const EmlpParams& p, const ParticleConfig& X) {
  if (X.rows() != p.input_dim())
    throw ShapeError("emlp_forward: input has d = " + std::to_string(X.rows()) + ", expected " +
                     std::to_string(p.input_dim()));
  const Eigen::Index n = X.cols();
  EmlpTape tape;
  Eigen::MatrixXd h = X;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const EmlpLayer& layer = p.layers[l];
    Eigen::MatrixXd others = particle_sum(h).replicate(1, n) - h;
    Eigen::MatrixXd z = layer.W * h;
    if (layer.mixing) z.noalias() += layer.V * others;
    z.colwise() += layer.u;
    tape.inputs.push_back(h);
    tape.others.push_back(std::move(others));
    const bool linear = p.final_linear && l + 1 == p.layers.size();
    h = linear ? z : activate(p.activation, z);
    tape.pre.push_back(std::move(z));
  }
  tape.output = h;
  return tape;
}

EmlpParams emlp_gradient(const EmlpParams& p, const EmlpTape& tape, Eigen::MatrixXd dA) {
  EmlpParams grad = p;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const EmlpLayer& layer = p.layers[l];
    const bool linear = p.final_linear && l + 1 == p.layers.size();
    const Eigen::MatrixXd dZ =
        linear ? dA : Eigen::MatrixXd(dA.cwiseProduct(activation_slope(p.activation, tape.pre[l])));
    EmlpLayer& g = grad.layers[l];
    g.W.noalias() = dZ * tape.inputs[l].transpose();
    g.u = dZ.rowwise().sum();
    if (layer.mixing)
      g.V.noalias() = dZ * tape.others[l].transpose();
    else
      g.V.setZero();
    if (l > 0) {
      dA = layer.W.transpose() * dZ;
      if (layer.mixing) dA.noalias() += layer.V.transpose() * (g.u.replicate(1, dZ.cols()) - dZ);
    }
  }
  return grad;
}

template <typename Fn>
void for_each_block(EmlpParams& p, Fn&& fn) {
  for (auto& layer : p.layers) {
    fn(layer.W);
    fn(layer.V);
    fn(layer.u);
  }
}

template <typename Fn>
void for_each_block(MlpParams& p, Fn&& fn) {
  for (auto& layer : p.layers) {
    fn(layer.W);
    fn(layer.u);
  }
}

template <typename Params>
Eigen::VectorXd flatten_blocks(const Params& p) {
  Params copy = p;
  std::vector<double> flat;
  for_each_block(copy, [&](auto& block) {
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      for (Eigen::Index c = 0; c < block.cols(); ++c) flat.push_back(block(r, c));
  });
  return Eigen::Map<Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

template <typename Params>
void unflatten_blocks(Params& p, const Eigen::VectorXd& theta) {
  Eigen::Index pos = 0;
  for_each_block(p, [&](auto& block) {
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        if (pos >= theta.size()) throw ShapeError("unflatten: parameter vector too short");
        block(r, c) = theta(pos++);
      }
  });
  if (pos != theta.size()) throw ShapeError("unflatten: parameter vector too long");
}

} // namespace

MlpParams MlpParams::random(const std::vector<int>& widths, Activation activation, bool final_linear,
                            std::mt19937_64& rng) {
  check_widths(widths);
  MlpParams p;
  p.activation = activation;
  p.final_linear = final_linear;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    p.layers.push_back({glorot(widths[l + 1], widths[l], rng), Eigen::VectorXd::Zero(widths[l + 1])});
  return p;
}

int MlpParams::input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
int MlpParams::output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].u.size() != layers[l].W.rows()) throw ShapeError("MLP layer bias does not match W");
    if (l > 0 && layers[l].W.cols() != layers[l - 1].W.rows()) throw ShapeError("MLP layer widths do not chain");
  }
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) { return mlp_record(p, x).output; }

EmlpParams EmlpParams::random(const std::vector<int>& widths, Activation activation, bool final_linear,
                              std::mt19937_64& rng) {
  check_widths(widths);
  EmlpParams p;
  p.activation = activation;
  p.final_linear = final_linear;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    EmlpLayer layer;
    layer.W = glorot(widths[l + 1], widths[l], rng);
    layer.V = glorot(widths[l + 1], widths[l], rng);
    layer.u = Eigen::VectorXd::Zero(widths[l + 1]);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

int EmlpParams::input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
int EmlpParams::output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }

void EmlpParams::validate() const {
  if (layers.empty()) throw ShapeError("EMLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.V.rows() != layer.W.rows() || layer.V.cols() != layer.W.cols())
      throw ShapeError("EMLP layer: W and V shapes differ");
    if (layer.u.size() != layer.W.rows()) throw ShapeError("EMLP layer bias does not match W");
    if (l > 0 && layer.W.cols() != layers[l - 1].W.rows()) throw ShapeError("EMLP layer widths do not chain");
  }
}

ParticleConfig emlp_forward(const EmlpParams& p, const ParticleConfig& X) { return emlp_record(p, X).output; }

ParticleConfig untied_emlp_layer(const std::vector<EmlpLayer>& per_channel, Activation activation,
                                 const ParticleConfig& X) {
  if (static_cast<Eigen::Index>(per_channel.size()) != X.cols())
    throw ShapeError("untied_emlp_layer: one layer per particle required");
  const Eigen::VectorXd total = particle_sum(X);
  ParticleConfig Y(per_channel.front().W.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const auto& layer = per_channel[static_cast<std::size_t>(i)];
    Eigen::VectorXd z = layer.W * X.col(i) + layer.V * (total - X.col(i)) + layer.u;
    Y.col(i) = activate(activation, z);
  }
  return Y;
}

void validate_head(HeadSpec head, int d, int d_out, int n) {
  switch (head.kind) {
    case HeadKind::MeanPool:
    case HeadKind::MaxPool:
      if (d_out != 1) throw ShapeError("pooling head for a scalar model needs d' = 1, got " + std::to_string(d_out));
      break;
    case HeadKind::VandermondeProduct:
      if (d != 1 || d_out != 1) throw ShapeError("Vandermonde head needs d = 1 and d' = 1");
      break;
    case HeadKind::GsdHead:
      if (d_out != n)
        throw ShapeError("GSD head needs d' = n = " + std::to_string(n) + ", got " + std::to_string(d_out));
      break;
  }
}

Eigen::VectorXd pool(HeadKind kind, const Eigen::MatrixXd& Y) {
  if (kind == HeadKind::MeanPool) return particle_sum(Y) / static_cast<double>(Y.cols());
  if (kind == HeadKind::MaxPool) return Y.rowwise().maxCoeff();
  throw DomainError("pool: " + to_string(kind) + " is not a pooling head");
}

double head_apply(HeadSpec head, const Eigen::MatrixXd& Y, const ParticleConfig& X) {
  if (Y.cols() != X.cols()) throw ShapeError("head_apply: output and input particle counts differ");
  validate_head(head, static_cast<int>(X.rows()), static_cast<int>(Y.rows()), static_cast<int>(X.cols()));
  switch (head.kind) {
    case HeadKind::MeanPool:
    case HeadKind::MaxPool: return pool(head.kind, Y)(0);
    case HeadKind::VandermondeProduct: return particle_mean(Y) * vandermonde(X.row(0));
    case HeadKind::GsdHead: return slater_det(Y.transpose());
  }
  throw DomainError("head_apply: unknown head");
}

EquivariantModel EquivariantModel::random(int n, int d, const std::vector<int>& hidden, HeadSpec head,
                                          Activation activation, std::mt19937_64& rng) {
  std::vector<int> widths{d};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(head.kind == HeadKind::GsdHead ? n : 1);
  EquivariantModel model{EmlpParams::random(widths, activation, true, rng), head, n};
  model.validate();
  return model;
}

void EquivariantModel::validate() const {
  emlp.validate();
  validate_head(head, emlp.input_dim(), emlp.output_dim(), n);
}

double EquivariantModel::operator()(const ParticleConfig& X) const { return model_forward(*this, X); }

double model_forward(const EquivariantModel& model, const ParticleConfig& X) {
  if (X.cols() != model.n) throw ShapeError("model_forward: model expects n = " + std::to_string(model.n));
  return head_apply(model.head, emlp_forward(model.emlp, X), X);
}

ModelGradient backward(const EquivariantModel& model, const ParticleConfig& X, double loss_grad) {
  if (X.cols() != model.n) throw ShapeError("backward: model expects n = " + std::to_string(model.n));
  const EmlpTape tape = emlp_record(model.emlp, X);
  const Eigen::MatrixXd& Y = tape.output;
  const auto n = static_cast<double>(X.cols());
  ModelGradient out;
  Eigen::MatrixXd dY = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
  switch (model.head.kind) {
    case HeadKind::MeanPool:
      out.output = particle_mean(Y);
      dY.setConstant(loss_grad / n);
      break;
    case HeadKind::MaxPool: {
      Eigen::Index arg = 0;
      out.output = Y.row(0).maxCoeff(&arg);
      dY(0, arg) = loss_grad;
      break;
    }
    case HeadKind::VandermondeProduct: {
      const double delta = vandermonde(X.row(0));
      out.output = particle_mean(Y) * delta;
      dY.setConstant(loss_grad * delta / n);
      break;
    }
    case HeadKind::GsdHead: {
      const DetGradient dg = det_gradient(Y.transpose());
      out.output = dg.det;
      out.det_condition = dg.condition;
      out.det_method = dg.method;
      dY = loss_grad * dg.gradient.transpose();
      break;
    }
  }
  out.grad = emlp_gradient(model.emlp, tape, std::move(dY));
  return out;
}

MlpParams mlp_backward(const MlpParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& out_grad) {
  const MlpTape tape = mlp_record(p, x);
  if (out_grad.size() != tape.output.size()) throw ShapeError("mlp_backward: output gradient size mismatch");
  MlpParams grad = p;
  Eigen::VectorXd dA = out_grad;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const bool linear = p.final_linear && l + 1 == p.layers.size();
    const Eigen::VectorXd dZ =
        linear ? dA : Eigen::VectorXd(dA.cwiseProduct(activation_slope(p.activation, tape.pre[l])));
    grad.layers[l].W.noalias() = dZ * tape.inputs[l].transpose();
    grad.layers[l].u = dZ;
    if (l > 0) dA = p.layers[l].W.transpose() * dZ;
  }
  return grad;
}

Eigen::VectorXd flatten(const EmlpParams& p) { return flatten_blocks(p); }
void unflatten(EmlpParams& p, const Eigen::VectorXd& theta) { unflatten_blocks(p, theta); }
Eigen::VectorXd flatten(const MlpParams& p) { return flatten_blocks(p); }
void unflatten(MlpParams& p, const Eigen::VectorXd& theta) { unflatten_blocks(p, theta); }
Eigen::VectorXd flatten(const EquivariantModel& m) { return flatten(m.emlp); }
void unflatten(EquivariantModel& m, const Eigen::VectorXd& theta) { unflatten(m.emlp, theta); }

namespace {

// sample_step(model, sample, grad) returns the squared error and adds its
// gradient w.r.t. the flat parameters into grad
template <typename Model, typename Sample, typename Step>
TrainResult<Model> run_training(Model model, const std::vector<Sample>& data, const TrainConfig& config,
                                Step&& sample_step) {
  if (data.empty()) throw ShapeError("train: empty dataset");
  if (config.batch < 1 || config.epochs < 0 || !(config.lr > 0.0)) throw DomainError("train: invalid configuration");
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  Eigen::VectorXd theta = flatten(model);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size()), m2 = m1, grad(theta.size());
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double decay =
      config.epochs > 1 ? std::pow(config.final_lr_fraction, 1.0 / (config.epochs - 1)) : 1.0;
  double lr = config.lr;
  long long step = 0;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult<Model> result{model, {}, 0};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(config.batch)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(config.batch));
      grad.setZero();
      double batch_loss = 0.0;
      for (std::size_t k = b0; k < b1; ++k) batch_loss += sample_step(model, data[order[k]], grad);
      if (!std::isfinite(batch_loss) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch starting at " << b0 << " (loss "
            << batch_loss << ", |theta| " << theta.norm() << ")";
        throw TrainingError(msg.str());
      }
      epoch_loss += batch_loss;
      grad /= static_cast<double>(b1 - b0);
      ++step;
      if (config.optimizer == Optimizer::Sgd) {
        theta -= lr * grad;
      } else {
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      }
      unflatten(model, theta);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(data.size()));
    result.epochs_run = epoch + 1;
    lr *= decay;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > config.max_seconds) break;
  }
  result.model = std::move(model);
  return result;
}

} // namespace

TrainResult<EquivariantModel> train(EquivariantModel model, const std::vector<ParticleSample>& data,
                                    const TrainConfig& config) {
  model.validate();
  return run_training(std::move(model), data, config,
                      [](const EquivariantModel& m, const ParticleSample& s, Eigen::VectorXd& grad) {
                        const double out = model_forward(m, s.X);
                        const double r = out - s.target;
                        grad += flatten(backward(m, s.X, 2.0 * r).grad);
                        return r * r;
                      });
}

TrainResult<MlpParams> train(MlpParams model, const std::vector<VectorSample>& data, const TrainConfig& config) {
  model.validate();
  return run_training(std::move(model), data, config,
                      [](const MlpParams& m, const VectorSample& s, Eigen::VectorXd& grad) {
                        const Eigen::VectorXd r = mlp_forward(m, s.x) - s.target;
                        grad += flatten(mlp_backward(m, s.x, 2.0 * r));
                        return r.squaredNorm();
                      });
}

double mean_squared_error(const EquivariantModel& model, const std::vector<ParticleSample>& data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : data) {
    const double r = model_forward(model, s.X) - s.target;
    sum += r * r;
  }
  return sum / static_cast<double>(data.size());
}

TrainResult<MlpParams> fit_outer_mlp(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                     const std::vector<int>& hidden, const TrainConfig& config) {
  if (features.rows() != targets.size()) throw ShapeError("fit_outer_mlp: one target per feature row required");
  std::vector<int> widths{static_cast<int>(features.cols())};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  std::mt19937_64 init(config.seed ^ 0x9e3779b97f4a7c15ULL);
  MlpParams model = MlpParams::random(widths, Activation::Tanh, true, init);
  std::vector<VectorSample> data;
  for (Eigen::Index s = 0; s < features.rows(); ++s)
    data.push_back({features.row(s).transpose(), Eigen::VectorXd::Constant(1, targets(s))});
  return train(std::move(model), data, config);
}

double symmetrize_approximant(const ScalarFunction& g, const ParticleConfig& X, TargetSymmetry symmetry) {
  if (X.cols() > kMaxPolyOrbitN)
    throw OracleSizeError("symmetrize_approximant: limited to n <= 8, got n = " + std::to_string(X.cols()));
  return symmetry == TargetSymmetry::Symmetric ? symmetrize(g, X) : antisymmetrize(g, X);
}

Eigen::MatrixXd symmetrize_approximant(const MatrixFunction& G, const ParticleConfig& X) {
  check_config(X);
  if (X.cols() > kMaxPolyOrbitN)
    throw OracleSizeError("symmetrize_approximant: limited to n <= 8, got n = " + std::to_string(X.cols()));
  Eigen::MatrixXd sum;
  double count = 0.0;
  for_each_permutation(static_cast<int>(X.cols()), [&](const Permutation& p) {
    Eigen::MatrixXd back = apply(p.inverse(), G(apply(p, X)));
    if (count == 0.0)
      sum = std::move(back);
    else
      sum += back;
    count += 1.0;
  });
  return sum / count;
}

} // namespace equisym
