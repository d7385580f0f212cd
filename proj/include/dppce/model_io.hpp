#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dppce/kernel_factor.hpp"
#include "dppce/training.hpp"

namespace dppce {

/// Binary model container. Header: magic "DPPM", u32 format version, u64 M,
/// u64 K, u64 seed, u64 config digest, M original item ids (i64); payload:
/// M·K factor entries, row-major f64. Everything little-endian regardless of
/// host order, so a model reloads bit-for-bit.
struct LoadedModel {
  KernelFactor factor;
  std::vector<std::int64_t> catalog;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
};

void save_model(const std::string& path, const KernelFactor& factor,
                std::span<const std::int64_t> catalog,
                std::uint64_t config_digest, std::uint64_t seed);

LoadedModel load_model(const std::string& path);

/// FNV-1a digest of the canonical config text; stored in the model header so
/// an evaluation can tell which training settings produced it.
std::uint64_t config_digest(const TrainConfig& config);

}  // namespace dppce
