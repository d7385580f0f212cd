#include "dppce/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "dppce/conditioning.hpp"
#include "dppce/errors.hpp"
#include "dppce/objectives.hpp"

namespace dppce {

namespace {

// Deterministic parallel map: out[i] = fn(i), reduced by the caller in index
// order, so thread count never changes results.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / static_cast<std::size_t>(threads);
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<ItemIndex> without(const Basket& basket, ItemIndex held) {
  std::vector<ItemIndex> rest;
  rest.reserve(basket.size() - 1);
  for (ItemIndex x : basket.items())
    if (x != held) rest.push_back(x);
  return rest;
}

// Floyd's algorithm: n distinct uniform draws from [0, m).
std::vector<ItemIndex> sample_without_replacement(ItemIndex m, std::size_t n,
                                                  Rng& rng) {
  std::set<ItemIndex> chosen;
  for (std::uint64_t j = static_cast<std::uint64_t>(m) - n;
       j < static_cast<std::uint64_t>(m); ++j) {
    const auto t = static_cast<ItemIndex>(rng.uniform_index(j + 1));
    if (!chosen.insert(t).second) chosen.insert(static_cast<ItemIndex>(j));
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

Vector next_item_scores(const KernelFactor& factor, ItemSpan base,
                        RankingScore score) {
  if (score == RankingScore::kExtension)
    return extension_scores(factor, base).scores;
  return conditional_marginals(condition(dual_kernel(factor), factor, base));
}

double percentile_rank_from_scores(const Vector& scores, ItemSpan base,
                                   ItemIndex held_out) {
  const auto m = static_cast<ItemIndex>(scores.size());
  check_items(base, m);
  for (ItemIndex b : base)
    if (b == held_out)
      throw InputError("percentile rank: held-out item is in the base set");
  const double held_score = scores[held_out];
  std::int64_t at_or_below = 0;
  std::size_t pos = 0;
  ItemIndex candidates = 0;
  for (ItemIndex i = 0; i < m; ++i) {
    if (pos < base.size() && base[pos] == i) {
      ++pos;
      continue;
    }
    ++candidates;
    if (held_score >= scores[i]) ++at_or_below;
  }
  return 100.0 * static_cast<double>(at_or_below) /
         static_cast<double>(candidates);
}

double percentile_rank(const KernelFactor& factor,
                       const Basket& basket_minus_i, ItemIndex held_out,
                       RankingScore score) {
  const Vector scores =
      next_item_scores(factor, basket_minus_i.span(), score);
  return percentile_rank_from_scores(scores, basket_minus_i.span(), held_out);
}

double mpr(const KernelFactor& factor, std::span<const Basket> test_baskets,
           Rng& rng, const EvalOptions& options, int* skipped) {
  std::vector<double> ranks(test_baskets.size(),
                            std::numeric_limits<double>::quiet_NaN());
  parallel_for(test_baskets.size(), options.threads, [&](std::size_t i) {
    const Basket& basket = test_baskets[i];
    if (basket.size() < 2) return;  // cannot condition after holding out
    Rng case_rng = rng.split(i);
    const ItemIndex held =
        basket.items()[case_rng.uniform_index(basket.size())];
    try {
      const Vector scores =
          next_item_scores(factor, without(basket, held), options.score);
      std::vector<ItemIndex> base = without(basket, held);
      ranks[i] = percentile_rank_from_scores(scores, base, held);
    } catch (const ConditionError&) {
      // left NaN: skipped
    }
  });
  double sum = 0.0;
  std::int64_t used = 0;
  int skip_count = 0;
  for (double r : ranks) {
    if (std::isnan(r)) {
      ++skip_count;
    } else {
      sum += r;
      ++used;
    }
  }
  if (skipped != nullptr) *skipped = skip_count;
  return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

double precision_at_k(const KernelFactor& factor,
                      std::span<const Basket> test_baskets, int k,
                      const EvalOptions& options) {
  if (k < 1) throw InputError("precision_at_k: k must be >= 1");
  std::vector<double> fractions(test_baskets.size(),
                                std::numeric_limits<double>::quiet_NaN());
  parallel_for(test_baskets.size(), options.threads, [&](std::size_t i) {
    const Basket& basket = test_baskets[i];
    std::int64_t hits = 0;
    std::int64_t used = 0;
    for (ItemIndex held : basket.items()) {
      const std::vector<ItemIndex> base = without(basket, held);
      try {
        const Vector scores = next_item_scores(factor, base, options.score);
        // rank 1 = best; ties resolved optimistically, matching the >= of PR
        std::int64_t rank = 1;
        std::size_t pos = 0;
        for (ItemIndex j = 0; j < factor.num_items(); ++j) {
          if (pos < base.size() && base[pos] == j) {
            ++pos;
            continue;
          }
          if (j != held && scores[j] > scores[held]) ++rank;
        }
        if (rank <= k) ++hits;
        ++used;
      } catch (const ConditionError&) {
        // excluded from this basket's average
      }
    }
    if (used > 0)
      fractions[i] = static_cast<double>(hits) / static_cast<double>(used);
  });
  double sum = 0.0;
  std::int64_t used = 0;
  for (double f : fractions) {
    if (!std::isnan(f)) {
      sum += f;
      ++used;
    }
  }
  return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

double rank_sum_auc(std::span<const double> positive_scores,
                    std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty())
    throw InputError("rank_sum_auc: both populations must be non-empty");
  std::vector<std::pair<double, int>> all;  // (score, is_positive)
  all.reserve(positive_scores.size() + negative_scores.size());
  for (double s : positive_scores) all.emplace_back(s, 1);
  for (double s : negative_scores) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });
  // midranks over tie groups
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (all[t].second) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(positive_scores.size());
  const double nn = static_cast<double>(negative_scores.size());
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double auc_discrimination(const KernelFactor& factor,
                          std::span<const Basket> test_baskets, Rng& rng,
                          const EvalOptions& options) {
  if (test_baskets.empty())
    throw InputError("auc_discrimination: no test baskets");
  std::vector<double> pos(test_baskets.size());
  std::vector<double> neg(test_baskets.size());
  parallel_for(test_baskets.size(), options.threads, [&](std::size_t i) {
    const Basket& basket = test_baskets[i];
    Rng case_rng = rng.split(i);
    const Basket random_subset(sample_without_replacement(
        factor.num_items(), basket.size(), case_rng));
    pos[i] = log_prob(factor, basket);
    neg[i] = log_prob(factor, random_subset);  // -inf scores are valid: lowest
  });
  return rank_sum_auc(pos, neg);
}

EvalReport evaluate(const KernelFactor& factor, const Corpus& corpus, Rng& rng,
                    const EvalOptions& options) {
  const std::vector<Basket> test = corpus.split_baskets(Split::kTest);
  EvalReport report;
  Rng mpr_rng = rng.split(1);
  Rng auc_rng = rng.split(2);
  report.mpr = mpr(factor, test, mpr_rng, options, &report.mpr_skipped);
  for (int k : {1, 5, 10, 20})
    report.precision_at[k] = precision_at_k(factor, test, k, options);
  report.auc = auc_discrimination(factor, test, auc_rng, options);
  return report;
}

std::optional<double> symmetric_kl_shared(std::span<const double> p,
                                          std::span<const double> q) {
  if (p.size() != q.size())
    throw InputError("symmetric_kl_shared: size mismatch");
  double kl = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) {
      kl += (p[i] - q[i]) * std::log(p[i] / q[i]);
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return kl;
}

ToyDiagnostics toy_diagnostics(const KernelFactor& factor,
                               const Corpus& corpus, RankingScore score) {
  // Unique baskets of the corpus, in lexicographic order.
  std::set<std::vector<ItemIndex>> unique;
  for (const Basket& b : corpus.baskets) unique.insert(b.items());

  const std::vector<Basket> train = corpus.split_baskets(Split::kTrain);
  const ItemIndex m = corpus.num_items();

  ToyDiagnostics out;
  for (const auto& items : unique) {
    const Basket basket(items);
    ToyBasketSummary summary{basket, -1.0, std::nullopt};
    for (ItemIndex held : items) {
      const std::vector<ItemIndex> rest = without(basket, held);

      // Predictive next-item distribution given the remainder.
      Vector raw = next_item_scores(factor, rest, score);
      std::vector<double> predictive(m, 0.0);
      double total = 0.0;
      for (ItemIndex j = 0; j < m; ++j) total += raw[j];
      if (total > 0.0)
        for (ItemIndex j = 0; j < m; ++j) predictive[j] = raw[j] / total;

      // Empirical next-item distribution: conditional frequency of each
      // completion given the remainder, over the train split.
      std::vector<double> empirical(m, 0.0);
      double emp_total = 0.0;
      for (const Basket& tb : train) {
        bool contains_rest = true;
        for (ItemIndex r : rest)
          if (!tb.contains(r)) {
            contains_rest = false;
            break;
          }
        if (!contains_rest) continue;
        for (ItemIndex j : tb.items()) {
          if (std::find(rest.begin(), rest.end(), j) == rest.end()) {
            empirical[j] += 1.0;
            emp_total += 1.0;
          }
        }
      }
      if (emp_total > 0.0)
        for (ItemIndex j = 0; j < m; ++j) empirical[j] /= emp_total;

      ToyDirection dir{basket, held, predictive[held],
                       symmetric_kl_shared(empirical, predictive)};
      if (dir.correct_prob > summary.correct_prob) {
        summary.correct_prob = dir.correct_prob;
        summary.sym_kl = dir.sym_kl;
      }
      out.directions.push_back(std::move(dir));
    }
    out.baskets.push_back(std::move(summary));
  }

  double correct_sum = 0.0;
  for (const ToyBasketSummary& s : out.baskets) {
    correct_sum += s.correct_prob;
    if (s.sym_kl) out.net_sym_kl += *s.sym_kl;
  }
  out.mean_correct = out.baskets.empty()
                         ? 0.0
                         : correct_sum / static_cast<double>(out.baskets.size());
  return out;
}

}  // namespace dppce
