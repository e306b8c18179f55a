#include "equisym/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace equisym {

namespace {

constexpr std::array<char, 8> kMagic{'E', 'Q', 'S', 'Y', 'M', 'C', 'K', 'P'};

template <typename T>
void put(std::ostream& os, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw ShapeError("load_model: truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void put_block(std::ostream& os, const Eigen::MatrixXd& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) put<double>(os, M(r, c));
}

void get_block(std::istream& is, Eigen::MatrixXd& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = get<double>(is);
}

} // namespace

void save_model(std::ostream& os, const EquivariantModel& model) {
  model.validate();
  const auto& layers = model.emlp.layers;
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.emlp.input_dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(layers.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(layers.front().W.cols()));
  for (const auto& layer : layers) put<std::uint32_t>(os, static_cast<std::uint32_t>(layer.W.rows()));
  put<std::uint8_t>(os, model.emlp.activation == Activation::Tanh ? 0 : 1);
  put<std::uint8_t>(os, model.emlp.final_linear ? 1 : 0);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(model.head.kind));
  for (const auto& layer : layers) put<std::uint8_t>(os, layer.mixing ? 1 : 0);
  for (const auto& layer : layers) {
    put_block(os, layer.W);
    put_block(os, layer.V);
    put_block(os, layer.u);
  }
  if (!os) throw Error("save_model: write failed");
}

EquivariantModel load_model(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw ShapeError("load_model: not a checkpoint file");
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw ShapeError("load_model: unsupported checkpoint version " + std::to_string(version));
  EquivariantModel model;
  model.n = static_cast<int>(get<std::uint32_t>(is));
  const auto d = get<std::uint32_t>(is);
  const auto num_layers = get<std::uint32_t>(is);
  if (num_layers == 0 || num_layers > 1024) throw ShapeError("load_model: bad layer count");
  std::vector<int> widths;
  for (std::uint32_t l = 0; l <= num_layers; ++l) widths.push_back(static_cast<int>(get<std::uint32_t>(is)));
  if (widths.front() != static_cast<int>(d)) throw ShapeError("load_model: input width does not match d");
  const auto activation = get<std::uint8_t>(is);
  const auto final_linear = get<std::uint8_t>(is);
  const auto head = get<std::uint8_t>(is);
  if (activation > 1 || final_linear > 1 || head > static_cast<std::uint8_t>(HeadKind::GsdHead))
    throw ShapeError("load_model: bad header flags");
  model.emlp.activation = activation == 0 ? Activation::Tanh : Activation::Relu;
  model.emlp.final_linear = final_linear == 1;
  model.head.kind = static_cast<HeadKind>(head);
  for (std::uint32_t l = 0; l < num_layers; ++l) {
    EmlpLayer layer;
    layer.mixing = get<std::uint8_t>(is) != 0;
    layer.W.resize(widths[l + 1], widths[l]);
    layer.V.resize(widths[l + 1], widths[l]);
    layer.u.resize(widths[l + 1]);
    model.emlp.layers.push_back(std::move(layer));
  }
  for (auto& layer : model.emlp.layers) {
    get_block(is, layer.W);
    get_block(is, layer.V);
    Eigen::MatrixXd u(layer.u.size(), 1);
    get_block(is, u);
    layer.u = u.col(0);
  }
  model.validate();
  return model;
}

void save_model(const std::string& path, const EquivariantModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_model: cannot open '" + path + "'");
  save_model(os, model);
}

EquivariantModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_model: cannot open '" + path + "'");
  return load_model(is);
}

} // namespace equisym
