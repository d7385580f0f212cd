#pragma once

#include <span>
#include <string>
#include <vector>

#include "dppce/basket.hpp"
#include "dppce/kernel_factor.hpp"
#include "dppce/rng.hpp"
#include "dppce/stats.hpp"

namespace dppce {

enum class NegativeRegime { kDynamic, kExplicit, kProduct };

const char* regime_name(NegativeRegime regime);
NegativeRegime regime_from_name(const std::string& name);

struct NegativeBatch {
  std::vector<Basket> baskets;
  // Index into the generating positives span, one per basket; unused (npos)
  // for the product regime, which does not condition on a positive.
  std::vector<std::size_t> source_indices;
  NegativeRegime regime = NegativeRegime::kProduct;
  int source_epoch = 0;
  int skipped = 0;  // slots abandoned after repeated generation failures
};

/// One dynamic negative (model-dependent): removes an item of the positive
/// drawn proportionally to its empirical probability within the basket, then
/// inserts an outside item drawn proportionally to the extension scores of
/// the remaining base. The swap keeps the cardinality and guarantees the
/// result has nonzero probability under the current factor. Retries with a
/// different removed item when a base minor is singular; throws
/// GenerationError when every removal fails.
Basket dynamic_negative(const KernelFactor& factor, const Basket& positive,
                        const EmpiricalStats& stats, Rng& rng);

/// One approximate explicit negative (model-independent): samples i ≠ j
/// within the positive proportionally to p̂, removes j, and inserts an
/// outside item k drawn proportionally to 1 - P̂({i,k}); falls back to a
/// uniform outside draw when every candidate weight vanishes.
Basket explicit_negative(const Basket& positive, const EmpiricalStats& stats,
                         Rng& rng);

/// One draw from the product distribution: independent inclusion of each item
/// with probability p̂(i); empty draws are rejected and redrawn.
Basket product_negative(const EmpiricalStats& stats, ItemIndex num_items,
                        Rng& rng);

/// Exact log of the (untruncated) product measure; -inf when any included
/// item has p̂ = 0 or any excluded item has p̂ = 1. Accepts the empty set.
double product_log_density(const EmpiricalStats& stats, ItemSpan basket,
                           ItemIndex num_items);

/// ceil(ratio·|positives|) negatives, their source positives cycled through a
/// seeded shuffle so one positive can yield several distinct negatives.
/// Failed generations are resampled up to 10 times, then the slot is skipped
/// and counted.
NegativeBatch generate_batch(NegativeRegime regime, const KernelFactor& factor,
                             std::span<const Basket> positives,
                             const EmpiricalStats& stats, double ratio,
                             Rng& rng, int source_epoch = 0);

}  // namespace dppce
