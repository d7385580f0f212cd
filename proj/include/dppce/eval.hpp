#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dppce/basket.hpp"
#include "dppce/data.hpp"
#include "dppce/kernel_factor.hpp"
#include "dppce/rng.hpp"

namespace dppce {

/// What drives next-item ranking: Schur-complement determinant ratios
/// (default) or conditional inclusion marginals. The two agree on ranking
/// only in special cases, so the choice is configuration, not assumption.
enum class RankingScore { kExtension, kMarginal };

struct EvalOptions {
  RankingScore score = RankingScore::kExtension;
  int threads = 1;
};

/// Scores for every catalog item given an observed base set (entries at base
/// items are 0).
Vector next_item_scores(const KernelFactor& factor, ItemSpan base,
                        RankingScore score);

/// PR = 100 * |{i' not in base : s(held) >= s(i')}| / |catalog \ base|.
/// Ties count in the held-out item's favor, as the >= in the definition says.
double percentile_rank_from_scores(const Vector& scores, ItemSpan base,
                                   ItemIndex held_out);

double percentile_rank(const KernelFactor& factor,
                       const Basket& basket_minus_i, ItemIndex held_out,
                       RankingScore score = RankingScore::kExtension);

/// Mean percentile rank over test baskets, one seeded random held-out item
/// per basket. Baskets whose remainder cannot be conditioned on are skipped
/// and counted in *skipped.
double mpr(const KernelFactor& factor, std::span<const Basket> test_baskets,
           Rng& rng, const EvalOptions& options = {}, int* skipped = nullptr);

/// Mean over test baskets of the fraction of items whose leave-one-out rank
/// is at most k (rank 1 is best; ties rank optimistically).
double precision_at_k(const KernelFactor& factor,
                      std::span<const Basket> test_baskets, int k,
                      const EvalOptions& options = {});

/// Discrimination AUC: each positive test basket is paired with an equal-size
/// subset drawn uniformly at random without replacement; both populations are
/// scored by log-likelihood and compared by exact rank statistics (tied pairs
/// count one half).
double auc_discrimination(const KernelFactor& factor,
                          std::span<const Basket> test_baskets, Rng& rng,
                          const EvalOptions& options = {});

/// Exact Mann-Whitney AUC of positives versus negatives with midrank ties.
double rank_sum_auc(std::span<const double> positive_scores,
                    std::span<const double> negative_scores);

/// One evaluation pass worth of metrics.
struct EvalReport {
  double mpr = 0.0;
  std::map<int, double> precision_at;  // k in {1, 5, 10, 20}
  double auc = 0.0;
  int mpr_skipped = 0;
};

EvalReport evaluate(const KernelFactor& factor, const Corpus& corpus, Rng& rng,
                    const EvalOptions& options = {});

/// Per held-out-item view of the synthetic two-mode experiment.
struct ToyDirection {
  Basket basket;
  ItemIndex held_out;
  double correct_prob = 0.0;          // predictive mass on the true completion
  std::optional<double> sym_kl;       // vs empirical next-item distribution,
                                      // absent when there is no shared support
};

/// One summary per unique basket: its designated direction is the one the
/// model completes best, and the KL is measured on that same direction.
struct ToyBasketSummary {
  Basket basket;
  double correct_prob = 0.0;
  std::optional<double> sym_kl;
};

struct ToyDiagnostics {
  std::vector<ToyDirection> directions;   // every (basket, held-out) pair
  std::vector<ToyBasketSummary> baskets;  // one per unique basket
  double mean_correct = 0.0;              // mean of per-basket correct_prob
  double net_sym_kl = 0.0;                // sum of per-basket KLs
};

ToyDiagnostics toy_diagnostics(const KernelFactor& factor,
                               const Corpus& corpus,
                               RankingScore score = RankingScore::kExtension);

/// Symmetric KL over the outcomes where both distributions are positive,
/// without renormalizing: sum (p-q)·log(p/q). nullopt when the shared
/// support is empty.
std::optional<double> symmetric_kl_shared(std::span<const double> p,
                                          std::span<const double> q);

}  // namespace dppce
