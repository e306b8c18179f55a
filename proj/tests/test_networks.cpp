#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "equisym/networks.hpp"
#include "oracles.hpp"

using namespace equisym;

namespace {

double scaled_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

} // namespace

TEST_CASE("activation and head names round trip") {
  for (Activation a : {Activation::Tanh, Activation::Relu}) CHECK(activation_from_string(to_string(a)) == a);
  for (HeadKind h : {HeadKind::MeanPool, HeadKind::MaxPool, HeadKind::VandermondeProduct, HeadKind::GsdHead})
    CHECK(head_kind_from_string(to_string(h)) == h);
  CHECK_THROWS_AS(activation_from_string("sigmoid"), DomainError);
}

TEST_CASE("EMLP is permutation equivariant") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 5; ++n) {
    const EmlpParams p = EmlpParams::random({2, 6, 6, 3}, Activation::Tanh, true, rng);
    const ParticleConfig X = oracle::uniform_matrix(2, n, 1.0, rng);
    const ParticleConfig Y = emlp_forward(p, X);
    CHECK(Y.rows() == 3);
    CHECK(Y.cols() == n);
    for (const auto& perm : enumerate(n))
      CHECK((emlp_forward(p, apply(perm, X)) - apply(perm, Y)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("untied channel weights break equivariance") {
  std::mt19937_64 rng(2);
  const int n = 3;
  std::vector<EmlpLayer> channels;
  for (int i = 0; i < n; ++i) channels.push_back(EmlpParams::random({1, 4}, Activation::Tanh, false, rng).layers[0]);
  const ParticleConfig X = oracle::uniform_matrix(1, n, 1.0, rng);
  const ParticleConfig Y = untied_emlp_layer(channels, Activation::Tanh, X);
  double worst = 0.0;
  for (const auto& perm : enumerate(n))
    worst = std::max(worst, (untied_emlp_layer(channels, Activation::Tanh, apply(perm, X)) - apply(perm, Y)).cwiseAbs().maxCoeff());
  CHECK(worst > 1e-3);
}

TEST_CASE("a non-mixing layer acts on each particle alone") {
  std::mt19937_64 rng(3);
  EmlpParams p = EmlpParams::random({2, 5}, Activation::Relu, false, rng);
  p.layers[0].mixing = false;
  const ParticleConfig X = oracle::uniform_matrix(2, 4, 1.0, rng);
  const ParticleConfig Y = emlp_forward(p, X);
  ParticleConfig X2 = X;
  X2.col(3).setConstant(5.0);
  CHECK(emlp_forward(p, X2).leftCols(3) == Y.leftCols(3));
}

TEST_CASE("head shape requirements") {
  CHECK_THROWS_AS(validate_head({HeadKind::MeanPool}, 1, 2, 3), ShapeError);
  CHECK_THROWS_AS(validate_head({HeadKind::GsdHead}, 1, 2, 3), ShapeError);
  CHECK_THROWS_AS(validate_head({HeadKind::VandermondeProduct}, 2, 1, 3), ShapeError);
  CHECK_NOTHROW(validate_head({HeadKind::GsdHead}, 2, 3, 3));
  Eigen::MatrixXd Y(2, 3);
  Y << 1, 2, 3,
       4, -5, 6;
  CHECK(pool(HeadKind::MeanPool, Y) == Eigen::Vector2d(2, 5.0 / 3.0));
  CHECK(pool(HeadKind::MaxPool, Y) == Eigen::Vector2d(3, 6));
}

TEST_CASE("pool heads are invariant, determinant heads flip sign") {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 5; ++n) {
    const ParticleConfig X1 = oracle::uniform_matrix(1, n, 1.0, rng);
    const ParticleConfig X2 = oracle::uniform_matrix(2, n, 1.0, rng);
    struct Case {
      EquivariantModel model;
      const ParticleConfig* X;
      bool anti;
    };
    std::vector<Case> cases{
        {EquivariantModel::random(n, 2, {8}, {HeadKind::MeanPool}, Activation::Tanh, rng), &X2, false},
        {EquivariantModel::random(n, 2, {8}, {HeadKind::MaxPool}, Activation::Tanh, rng), &X2, false},
        {EquivariantModel::random(n, 1, {8}, {HeadKind::VandermondeProduct}, Activation::Tanh, rng), &X1, true},
        {EquivariantModel::random(n, 2, {8, 8}, {HeadKind::GsdHead}, Activation::Tanh, rng), &X2, true},
    };
    for (const auto& c : cases) {
      const double f = c.model(*c.X);
      for (const auto& perm : enumerate(n)) {
        const double fp = c.model(apply(perm, *c.X));
        if (c.anti)
          CHECK(std::abs(fp - perm.parity() * f) <= 1e-11 * std::max(1.0, std::abs(f)));
        else
          CHECK(std::abs(fp - f) <= 1e-12);
      }
    }
  }
}

TEST_CASE("backward matches central differences for every head") {
  std::mt19937_64 rng(5);
  const int n = 3;
  for (HeadKind kind : {HeadKind::MeanPool, HeadKind::MaxPool, HeadKind::VandermondeProduct, HeadKind::GsdHead})
    for (int instance = 0; instance < 3; ++instance) {
      const int d = kind == HeadKind::VandermondeProduct ? 1 : 2;
      EquivariantModel model = EquivariantModel::random(n, d, {5, 4}, {kind}, Activation::Tanh, rng);
      const ParticleConfig X = oracle::uniform_matrix(d, n, 1.0, rng);
      const ModelGradient g = backward(model, X, 1.0);
      CHECK(g.output == doctest::Approx(model(X)));
      const Eigen::VectorXd theta = flatten(model);
      const Eigen::VectorXd fd = oracle::central_difference(
          [&](const Eigen::VectorXd& t) {
            EquivariantModel m = model;
            unflatten(m, t);
            return m(X);
          },
          theta);
      CHECK(scaled_error(flatten(g.grad), fd) < 1e-5);
      // the loss gradient scales the result linearly
      CHECK(scaled_error(flatten(backward(model, X, -2.5).grad), -2.5 * flatten(g.grad)) < 1e-12);
    }
}

TEST_CASE("mlp_backward matches central differences") {
  std::mt19937_64 rng(6);
  const MlpParams p = MlpParams::random({4, 7, 3}, Activation::Tanh, true, rng);
  const Eigen::VectorXd x = oracle::uniform_matrix(4, 1, 1.0, rng);
  const Eigen::VectorXd w = oracle::uniform_matrix(3, 1, 1.0, rng);
  const Eigen::VectorXd fd = oracle::central_difference(
      [&](const Eigen::VectorXd& t) {
        MlpParams q = p;
        unflatten(q, t);
        return w.dot(mlp_forward(q, x));
      },
      flatten(p));
  CHECK(scaled_error(flatten(mlp_backward(p, x, w)), fd) < 1e-6);
}

TEST_CASE("flatten and unflatten round trip") {
  std::mt19937_64 rng(7);
  EquivariantModel m = EquivariantModel::random(3, 2, {4, 4}, {HeadKind::GsdHead}, Activation::Relu, rng);
  const Eigen::VectorXd theta = flatten(m);
  EquivariantModel copy = m;
  unflatten(copy, Eigen::VectorXd::Zero(theta.size()));
  CHECK(flatten(copy).isZero());
  unflatten(copy, theta);
  CHECK(flatten(copy) == theta);
  CHECK_THROWS_AS(unflatten(copy, Eigen::VectorXd::Zero(theta.size() + 1)), ShapeError);
}

TEST_CASE("training is deterministic and reduces the loss") {
  std::mt19937_64 rng(8);
  std::vector<ParticleSample> data;
  for (int s = 0; s < 200; ++s) {
    ParticleConfig X = oracle::uniform_matrix(1, 3, 1.0, rng);
    const double t = X(0, 0) * X(0, 1) + X(0, 0) * X(0, 2) + X(0, 1) * X(0, 2);
    data.push_back({X, t});
  }
  const EquivariantModel init = EquivariantModel::random(3, 1, {16}, {HeadKind::MeanPool}, Activation::Tanh, rng);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 1e-2;
  cfg.seed = 42;
  const auto a = train(init, data, cfg);
  const auto b = train(init, data, cfg);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(flatten(a.model) == flatten(b.model));
  CHECK(a.epochs_run == 30);
  CHECK(a.loss_trace.back() < 0.5 * a.loss_trace.front());
  CHECK(mean_squared_error(a.model, data) < mean_squared_error(init, data));

  cfg.seed = 43;
  CHECK(train(init, data, cfg).loss_trace != a.loss_trace);
}

TEST_CASE("a non-finite loss raises TrainingError") {
  std::mt19937_64 rng(9);
  std::vector<ParticleSample> data{{oracle::uniform_matrix(1, 2, 1.0, rng), std::numeric_limits<double>::quiet_NaN()}};
  const EquivariantModel init = EquivariantModel::random(2, 1, {4}, {HeadKind::MeanPool}, Activation::Tanh, rng);
  CHECK_THROWS_AS(train(init, data, TrainConfig{}), TrainingError);
}

TEST_CASE("symmetrize_approximant produces the required symmetry") {
  std::mt19937_64 rng(10);
  const MlpParams g = MlpParams::random({3, 8, 1}, Activation::Tanh, true, rng);
  ScalarFunction f = [&](const ParticleConfig& X) {
    return mlp_forward(g, Eigen::Map<const Eigen::VectorXd>(X.data(), X.size()))(0);
  };
  const ParticleConfig X = oracle::uniform_matrix(1, 3, 1.0, rng);
  const double sym = symmetrize_approximant(f, X);
  const double anti = symmetrize_approximant(f, X, TargetSymmetry::Antisymmetric);
  for (const auto& p : enumerate(3)) {
    CHECK(symmetrize_approximant(f, apply(p, X)) == doctest::Approx(sym).epsilon(1e-14));
    CHECK(symmetrize_approximant(f, apply(p, X), TargetSymmetry::Antisymmetric) ==
          doctest::Approx(p.parity() * anti).epsilon(1e-12).scale(1.0));
  }

  const MlpParams G = MlpParams::random({3, 8, 6}, Activation::Tanh, true, rng);
  MatrixFunction F = [&](const ParticleConfig& Y) {
    return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(
        mlp_forward(G, Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size())).data(), 2, 3));
  };
  const Eigen::MatrixXd out = symmetrize_approximant(F, X);
  for (const auto& p : enumerate(3)) CHECK((symmetrize_approximant(F, apply(p, X)) - apply(p, out)).cwiseAbs().maxCoeff() < 1e-12);
}
