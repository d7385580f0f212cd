#include "dppce/negatives.hpp"

#include <algorithm>
#include <cmath>

#include "dppce/conditioning.hpp"
#include "dppce/errors.hpp"
#include "dppce/objectives.hpp"

namespace dppce {

namespace {

// Weighted draw with a uniform fallback when all weights vanish.
std::size_t pick(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total > 0.0) return rng.weighted_index(weights);
  return static_cast<std::size_t>(rng.uniform_index(weights.size()));
}

std::vector<double> restricted_singleton_weights(const Basket& basket,
                                                 const EmpiricalStats& stats) {
  std::vector<double> w(basket.size());
  for (std::size_t r = 0; r < basket.size(); ++r)
    w[r] = stats.singleton_prob[basket.items()[r]];
  return w;
}

Basket swap_item(const Basket& positive, ItemIndex removed, ItemIndex added) {
  std::vector<ItemIndex> items;
  items.reserve(positive.size());
  for (ItemIndex x : positive.items())
    if (x != removed) items.push_back(x);
  items.push_back(added);
  return Basket(std::move(items));
}

}  // namespace

const char* regime_name(NegativeRegime regime) {
  switch (regime) {
    case NegativeRegime::kDynamic:
      return "dynamic";
    case NegativeRegime::kExplicit:
      return "explicit";
    case NegativeRegime::kProduct:
      return "product";
  }
  return "?";
}

NegativeRegime regime_from_name(const std::string& name) {
  if (name == "dynamic") return NegativeRegime::kDynamic;
  if (name == "explicit") return NegativeRegime::kExplicit;
  if (name == "product") return NegativeRegime::kProduct;
  throw InputError("unknown negative regime '" + name + "'");
}

Basket dynamic_negative(const KernelFactor& factor, const Basket& positive,
                        const EmpiricalStats& stats, Rng& rng) {
  if (positive.size() < 2)
    throw GenerationError("dynamic negative: positive basket too small");
  positive.check_against(factor.num_items());

  // Removal candidates, dropped one by one when the remaining base turns out
  // to be singular or leaves no insertable item.
  std::vector<ItemIndex> candidates = positive.items();
  std::vector<double> weights = restricted_singleton_weights(positive, stats);

  while (!candidates.empty()) {
    const std::size_t r = pick(weights, rng);
    const ItemIndex removed = candidates[r];

    std::vector<ItemIndex> base;
    base.reserve(positive.size() - 1);
    for (ItemIndex x : positive.items())
      if (x != removed) base.push_back(x);

    bool base_ok = true;
    try {
      ExtensionScores ext = extension_scores(factor, base);
      // The swap must change the set, so the removed item is excluded too.
      ext.total -= ext.scores[removed];
      ext.scores[removed] = 0.0;
      if (ext.total > 0.0) {
        std::span<const double> scores(ext.scores.data(),
                                       static_cast<std::size_t>(ext.scores.size()));
        const auto added = static_cast<ItemIndex>(rng.weighted_index(scores));
        return swap_item(positive, removed, added);
      }
      base_ok = false;  // every insertion has zero score
    } catch (const ConditionError&) {
      base_ok = false;  // singular base minor
    }
    if (!base_ok) {
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(r));
      weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(r));
    }
  }
  throw GenerationError("dynamic negative: every removal left a singular or "
                        "saturated base");
}

Basket explicit_negative(const Basket& positive, const EmpiricalStats& stats,
                         Rng& rng) {
  if (positive.size() < 2)
    throw GenerationError("explicit negative: positive basket too small");
  const ItemIndex m = stats.num_items();
  positive.check_against(m);
  if (static_cast<std::size_t>(m) <= positive.size())
    throw GenerationError("explicit negative: no item outside the basket");

  const std::vector<double> wi = restricted_singleton_weights(positive, stats);
  const ItemIndex item_i = positive.items()[pick(wi, rng)];

  std::vector<ItemIndex> rest;
  std::vector<double> wj;
  for (ItemIndex x : positive.items()) {
    if (x == item_i) continue;
    rest.push_back(x);
    wj.push_back(stats.singleton_prob[x]);
  }
  const ItemIndex item_j = rest[pick(wj, rng)];

  std::vector<ItemIndex> outside;
  std::vector<double> wk;
  outside.reserve(m - positive.size());
  for (ItemIndex k = 0; k < m; ++k) {
    if (positive.contains(k)) continue;
    outside.push_back(k);
    wk.push_back(std::max(0.0, 1.0 - stats.pair(item_i, k)));
  }
  const ItemIndex item_k = outside[pick(wk, rng)];
  return swap_item(positive, item_j, item_k);
}

Basket product_negative(const EmpiricalStats& stats, ItemIndex num_items,
                        Rng& rng) {
  if (stats.num_items() != num_items)
    throw InputError("product negative: stats do not match catalog size");
  if (stats.singleton_prob.maxCoeff() <= 0.0)
    throw InputError("product negative: all singleton probabilities are zero");

  std::vector<ItemIndex> items;
  do {
    items.clear();
    for (ItemIndex i = 0; i < num_items; ++i)
      if (rng.bernoulli(stats.singleton_prob[i])) items.push_back(i);
  } while (items.empty());
  return Basket(std::move(items));
}

double product_log_density(const EmpiricalStats& stats, ItemSpan basket,
                           ItemIndex num_items) {
  if (stats.num_items() != num_items)
    throw InputError("product log-density: stats do not match catalog size");
  check_items(basket, num_items);
  double sum = 0.0;
  std::size_t pos = 0;
  for (ItemIndex i = 0; i < num_items; ++i) {
    const double p = stats.singleton_prob[i];
    if (pos < basket.size() && basket[pos] == i) {
      ++pos;
      if (p <= 0.0) return kNegInf;
      sum += std::log(p);
    } else {
      if (p >= 1.0) return kNegInf;
      sum += std::log1p(-p);
    }
  }
  return sum;
}

NegativeBatch generate_batch(NegativeRegime regime, const KernelFactor& factor,
                             std::span<const Basket> positives,
                             const EmpiricalStats& stats, double ratio,
                             Rng& rng, int source_epoch) {
  if (positives.empty()) throw InputError("generate_batch: no positives");
  if (!(ratio > 0.0)) throw InputError("generate_batch: ratio must be > 0");

  const auto want = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(positives.size())));

  NegativeBatch batch;
  batch.regime = regime;
  batch.source_epoch = source_epoch;
  batch.baskets.reserve(want);
  batch.source_indices.reserve(want);

  std::vector<std::size_t> order(positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  for (std::size_t slot = 0; slot < want; ++slot) {
    const std::size_t source = order[slot % order.size()];
    bool done = false;
    for (int attempt = 0; attempt < 10 && !done; ++attempt) {
      try {
        switch (regime) {
          case NegativeRegime::kDynamic:
            batch.baskets.push_back(
                dynamic_negative(factor, positives[source], stats, rng));
            break;
          case NegativeRegime::kExplicit:
            batch.baskets.push_back(
                explicit_negative(positives[source], stats, rng));
            break;
          case NegativeRegime::kProduct:
            batch.baskets.push_back(
                product_negative(stats, factor.num_items(), rng));
            break;
        }
        batch.source_indices.push_back(
            regime == NegativeRegime::kProduct ? SIZE_MAX : source);
        done = true;
      } catch (const GenerationError&) {
        // resample
      }
    }
    if (!done) ++batch.skipped;
  }
  return batch;
}

}  // namespace dppce
