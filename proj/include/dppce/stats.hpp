#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dppce/basket.hpp"
#include "dppce/kernel_factor.hpp"

namespace dppce {

/// Unordered-pair key; pairs never observed together are simply absent.
inline std::uint64_t pair_key(ItemIndex a, ItemIndex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Train-split statistics: singleton membership rates p̂(i), sparse pairwise
/// membership rates P̂({i,k}), and occurrence counts μ_i. Because baskets are
/// duplicate-free sets, μ_i equals basket_count·p̂(i) exactly.
struct EmpiricalStats {
  Vector singleton_prob;
  std::unordered_map<std::uint64_t, double> pair_prob;
  std::vector<std::int64_t> occurrence_counts;
  std::int64_t basket_count = 0;

  ItemIndex num_items() const {
    return static_cast<ItemIndex>(singleton_prob.size());
  }

  double pair(ItemIndex i, ItemIndex k) const {
    const auto it = pair_prob.find(pair_key(i, k));
    return it == pair_prob.end() ? 0.0 : it->second;
  }
};

}  // namespace dppce
