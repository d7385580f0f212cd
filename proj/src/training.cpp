#include "dppce/training.hpp"

#include <chrono>
#include <cmath>

#include "dppce/errors.hpp"

namespace dppce {

namespace {

NegativeRegime regime_for(Method method) {
  switch (method) {
    case Method::kCeDynamic:
      return NegativeRegime::kDynamic;
    case Method::kCeExplicit:
      return NegativeRegime::kExplicit;
    case Method::kCeProduct:
    case Method::kNce:
      return NegativeRegime::kProduct;
    case Method::kMle:
      break;
  }
  throw InputError("method has no negative regime");
}

bool uses_negatives(const TrainConfig& config) {
  return config.method != Method::kMle && config.negative_ratio > 0.0;
}

// Accumulates weight * (restricted-part gradient scattered onto basket rows);
// the caller applies the shared normalizer gradient once with the summed
// weight.
void scatter(Matrix& grad, const Basket& basket, const Matrix& rows,
             double weight) {
  const auto& items = basket.items();
  for (std::size_t r = 0; r < items.size(); ++r)
    grad.row(items[r]) += weight * rows.row(static_cast<Eigen::Index>(r));
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::kMle:
      return "mle";
    case Method::kCeDynamic:
      return "ce_dynamic";
    case Method::kCeExplicit:
      return "ce_explicit";
    case Method::kCeProduct:
      return "ce_product";
    case Method::kNce:
      return "nce";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::kMle, Method::kCeDynamic, Method::kCeExplicit,
                   Method::kCeProduct, Method::kNce}) {
    if (name == method_name(m)) return m;
  }
  throw InputError("unknown method '" + name + "'");
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kAborted:
      return "aborted";
  }
  return "?";
}

double step_size_at(std::int64_t t, const TrainConfig& config) {
  if (t < 0) throw InputError("step index must be nonnegative");
  switch (config.step_schedule) {
    case StepSchedule::kConstant:
      return config.step_size_initial;
    case StepSchedule::kInverseT:
      return config.step_size_initial /
             (1.0 + static_cast<double>(t) / config.step_t0);
  }
  return config.step_size_initial;
}

bool check_convergence(std::span<const double> validation_history,
                       double epsilon) {
  if (validation_history.size() < 2)
    throw InputError("check_convergence: needs at least two entries");
  if (!(epsilon > 0.0)) throw InputError("check_convergence: epsilon <= 0");
  const double prev = validation_history[validation_history.size() - 2];
  const double cur = validation_history[validation_history.size() - 1];
  const double change = std::abs(cur - prev);
  if (prev == 0.0) return change < epsilon;
  return change / std::abs(prev) < epsilon;
}

KernelFactor sga_step(const KernelFactor& factor,
                      std::span<const Basket> positives,
                      const NegativeBatch* negatives,
                      const EmpiricalStats& stats, const TrainConfig& config,
                      double step_size, StepLog* log) {
  if (positives.empty()) throw InputError("sga_step: no positives");
  if (!(step_size > 0.0)) throw InputError("sga_step: step size must be > 0");

  const NormalizerParts norm = normalizer_parts(factor);
  Matrix grad = Matrix::Zero(factor.num_items(), factor.rank());
  double normalizer_weight = 0.0;  // applied once at the end
  StepLog local;
  const bool nce = config.method == Method::kNce;
  const double log_ratio = std::log(config.negative_ratio);

  double positive_sum = 0.0;
  std::int64_t positive_used = 0;
  const double inv_pos = 1.0 / static_cast<double>(positives.size());
  for (const Basket& basket : positives) {
    const RestrictedParts parts = restricted_parts(factor, basket);
    if (!parts.grad_rows) {
      ++local.skipped;
      continue;
    }
    const double lp = parts.log_det - norm.log_det;
    positive_sum += lp;
    ++positive_used;
    double weight = inv_pos;
    if (nce) {
      const double noise =
          product_log_density(stats, basket.span(), factor.num_items());
      const double sigma = noise == kNegInf
                               ? 1.0
                               : stable_sigmoid(lp - noise - log_ratio);
      weight = (1.0 - sigma) * inv_pos;
    }
    scatter(grad, basket, *parts.grad_rows, weight);
    normalizer_weight += weight;
  }

  double negative_sum = 0.0;
  std::int64_t negative_used = 0;
  if (negatives != nullptr && !negatives->baskets.empty()) {
    const double inv_neg =
        1.0 / static_cast<double>(negatives->baskets.size());
    for (const Basket& basket : negatives->baskets) {
      const RestrictedParts parts = restricted_parts(factor, basket);
      const double lp =
          parts.grad_rows ? parts.log_det - norm.log_det : kNegInf;
      if (!nce && lp < kPathologicalFloor) {
        // Remark made literal: the model already assigns this negative ~zero
        // mass; keeping its gradient would only blow the step up.
        ++local.pathological;
        if (!parts.grad_rows) ++local.skipped;
        continue;
      }
      if (!parts.grad_rows) {
        ++local.skipped;
        continue;
      }
      negative_sum += lp;
      ++negative_used;
      double weight = -inv_neg;
      if (nce) {
        const double noise =
            product_log_density(stats, basket.span(), factor.num_items());
        const double sigma =
            lp == kNegInf ? 0.0 : stable_sigmoid(lp - noise - log_ratio);
        weight = -sigma * inv_pos;
      }
      scatter(grad, basket, *parts.grad_rows, weight);
      normalizer_weight += weight;
    }
  }

  grad.noalias() -= normalizer_weight * norm.grad;
  grad.noalias() -=
      regularizer_gradient(factor, stats.occurrence_counts, config.alpha);

  const double reg =
      regularizer_value(factor, stats.occurrence_counts, config.alpha);
  const double pos_mean =
      positive_used > 0 ? positive_sum / static_cast<double>(positive_used)
                        : kNegInf;
  const double neg_mean =
      negative_used > 0 ? negative_sum / static_cast<double>(negative_used)
                        : 0.0;
  local.objective = pos_mean - neg_mean - reg;

  Matrix updated = factor.values() + step_size * grad;
  if (config.row_norm_clip > 0.0) {
    for (Eigen::Index i = 0; i < updated.rows(); ++i) {
      const double n = updated.row(i).norm();
      if (n > config.row_norm_clip)
        updated.row(i) *= config.row_norm_clip / n;
    }
  }
  if (log != nullptr) {
    log->skipped += local.skipped;
    log->pathological += local.pathological;
    log->objective = local.objective;
  }
  return KernelFactor(std::move(updated));
}

std::pair<KernelFactor, TrainReport> train(const Corpus& corpus,
                                           const TrainConfig& config) {
  if (corpus.baskets.size() < 2)
    throw InputError("train: corpus needs at least two baskets");
  if (!(config.epsilon > 0.0)) throw InputError("train: epsilon must be > 0");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0))
    throw InputError("train: validation fraction must lie in (0, 1)");
  if (config.minibatch_size < 1 || config.max_iters < 1 ||
      config.refresh_every < 1)
    throw InputError("train: bad iteration parameters");

  const int rank = config.rank > 0 ? config.rank : infer_rank(corpus);
  if (static_cast<std::size_t>(rank) < corpus.max_basket_size())
    throw InputError("train: rank " + std::to_string(rank) +
                     " below the largest basket size " +
                     std::to_string(corpus.max_basket_size()));

  Rng rng(config.seed);
  KernelFactor factor =
      KernelFactor::random_init(corpus.num_items(), rank, rng);

  std::vector<Basket> train_baskets = corpus.split_baskets(Split::kTrain);
  std::vector<Basket> validation = corpus.split_baskets(Split::kValidation);
  if (validation.empty()) {
    // No validation split in the corpus: carve one out of the train share.
    Rng carve = rng.split(0x76616c);
    std::vector<std::size_t> order(train_baskets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    carve.shuffle(order);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.validation_fraction *
                                                 train_baskets.size())));
    std::vector<Basket> kept;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_val ? validation : kept).push_back(train_baskets[order[i]]);
    }
    train_baskets = std::move(kept);
  }
  if (train_baskets.empty()) throw InputError("train: empty train split");

  TrainReport report;
  const std::string regime_label =
      config.method == Method::kMle ? "none"
                                    : regime_name(regime_for(config.method));

  KernelFactor last_good = factor;
  std::vector<double> history;
  std::optional<NegativeBatch> cached_negatives;

  for (int epoch = 1; epoch <= config.max_iters; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train_baskets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double objective_sum = 0.0;
    std::int64_t objective_weight = 0;
    bool exploded = false;

    for (std::size_t begin = 0; begin < order.size() && !exploded;
         begin += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t end =
          std::min(order.size(),
                   begin + static_cast<std::size_t>(config.minibatch_size));
      std::vector<Basket> minibatch;
      minibatch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i)
        minibatch.push_back(train_baskets[order[i]]);

      const NegativeBatch* negatives = nullptr;
      if (uses_negatives(config)) {
        const bool refresh =
            config.method != Method::kCeDynamic || !cached_negatives ||
            report.steps % config.refresh_every == 0;
        if (refresh) {
          cached_negatives =
              generate_batch(regime_for(config.method), factor, minibatch,
                             corpus.stats, config.negative_ratio, rng, epoch);
        }
        negatives = &*cached_negatives;
      }

      StepLog step_log;
      factor = sga_step(factor, minibatch, negatives, corpus.stats, config,
                        step_size_at(report.steps, config), &step_log);
      ++report.steps;
      report.skipped_samples += step_log.skipped;
      report.pathological_warnings += step_log.pathological;
      objective_sum +=
          step_log.objective * static_cast<double>(minibatch.size());
      objective_weight += static_cast<std::int64_t>(minibatch.size());

      if (!factor.values().allFinite() || std::isnan(step_log.objective)) {
        exploded = true;
      }
    }

    double validation_ll = 0.0;
    if (!exploded) {
      for (const Basket& b : validation) validation_ll += log_prob(factor, b);
      validation_ll /= static_cast<double>(validation.size());
      if (std::isnan(validation_ll)) exploded = true;
    }

    if (exploded) {
      report.stop_reason = StopReason::kAborted;
      report.abort_diagnostic =
          "objective or factor became non-finite during epoch " +
          std::to_string(epoch) + "; returning last finite checkpoint";
      return {std::move(last_good), std::move(report)};
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.objective =
        objective_sum / static_cast<double>(std::max<std::int64_t>(
                            1, objective_weight));
    stats.validation_ll = validation_ll;
    stats.regime = regime_label;
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count();
    report.epochs.push_back(stats);
    report.iterations = epoch;
    history.push_back(validation_ll);
    last_good = factor;

    if (history.size() >= 2 && check_convergence(history, config.epsilon)) {
      report.stop_reason = StopReason::kConverged;
      return {std::move(factor), std::move(report)};
    }
  }
  report.stop_reason = StopReason::kMaxIters;
  return {std::move(factor), std::move(report)};
}

}  // namespace dppce
