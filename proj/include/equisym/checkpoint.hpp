#pragma once

#include <iosfwd>
#include <string>

#include "equisym/networks.hpp"

namespace equisym {

/// Binary model checkpoint, little-endian:
///
///   char[8]  "EQSYMCKP"
///   u32      version (1)
///   u32      n, d, L (number of layers)
///   u32[L+1] widths d_0 .. d_L
///   u8       activation (0 tanh, 1 relu), final_linear, head kind
///   u8[L]    mixing flag per layer
///   f64      per layer: W row-major, V row-major, u
///
/// Loading a saved model reproduces every weight bit for bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(std::ostream& os, const EquivariantModel& model);
EquivariantModel load_model(std::istream& is);

void save_model(const std::string& path, const EquivariantModel& model);
EquivariantModel load_model(const std::string& path);

} // namespace equisym
