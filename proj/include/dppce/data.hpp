#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dppce/basket.hpp"
#include "dppce/rng.hpp"
#include "dppce/stats.hpp"

namespace dppce {

enum class Split { kTrain, kValidation, kTest };

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct Provenance {
  std::string source;
  std::int64_t raw_baskets = 0;
  std::int64_t raw_items = 0;
  std::int64_t dropped_small = 0;
  std::int64_t clipped = 0;
  std::vector<std::string> log;
};

/// A loaded transaction corpus: dense item catalog, baskets with disjoint
/// exhaustive train/validation/test assignment, and train-split statistics.
/// Immutable once built; freely shared across threads.
struct Corpus {
  std::vector<std::int64_t> catalog;  // dense index -> original item id
  std::unordered_map<std::int64_t, ItemIndex> to_dense;
  std::vector<Basket> baskets;
  std::vector<Split> splits;  // aligned with baskets
  EmpiricalStats stats;       // computed on the train split only
  Provenance provenance;

  ItemIndex num_items() const { return static_cast<ItemIndex>(catalog.size()); }

  std::vector<std::size_t> split_indices(Split split) const;
  std::vector<Basket> split_baskets(Split split) const;
  std::size_t max_basket_size() const;
};

/// Plain-text transactions, one basket per line, whitespace-separated
/// non-negative integer item ids. Items are deduplicated within a basket,
/// baskets smaller than min_size are dropped, larger ones are clipped to a
/// seeded random subset of max_size items. Splits are assigned by a seeded
/// shuffle honoring the fractions to within one basket.
Corpus load_transactions(const std::string& path, std::size_t max_size,
                         std::size_t min_size, Rng& rng,
                         const SplitFractions& fractions = {});

/// The synthetic two-mode dataset: baskets {1,2} and {3,4} replicated 1000
/// times each, 80/20 train/test with validation carved out of the train
/// share (72/8/20 overall).
Corpus toy_corpus(Rng& rng);

EmpiricalStats compute_stats(std::span<const Basket> train_baskets,
                             ItemIndex num_items);

/// Size of the largest basket across all splits; the default kernel rank.
int infer_rank(const Corpus& corpus);

/// Canonical on-disk form: a directory with catalog.tsv, baskets.txt (original
/// ids) and splits.txt, all line-aligned.
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

}  // namespace dppce
