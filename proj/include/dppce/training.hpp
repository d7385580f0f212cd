#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dppce/data.hpp"
#include "dppce/kernel_factor.hpp"
#include "dppce/negatives.hpp"
#include "dppce/objectives.hpp"

namespace dppce {

enum class Method { kMle, kCeDynamic, kCeExplicit, kCeProduct, kNce };
enum class StepSchedule { kConstant, kInverseT };
enum class StopReason { kConverged, kMaxIters, kAborted };

const char* method_name(Method method);
Method method_from_name(const std::string& name);
const char* stop_reason_name(StopReason reason);

struct TrainConfig {
  Method method = Method::kMle;
  int rank = 0;  // 0: size of the largest basket in the corpus
  double alpha = 1.0;
  double negative_ratio = 0.5;  // |A-| / |A+|
  double step_size_initial = 0.1;
  StepSchedule step_schedule = StepSchedule::kInverseT;
  double step_t0 = 1000.0;  // inverse_t: eta_t = eta0 / (1 + t/t0)
  double epsilon = 1e-4;    // relative validation log-likelihood change
  int max_iters = 300;      // epochs
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // used only if the corpus has no val split
  int minibatch_size = 32;
  int refresh_every = 1;      // dynamic negatives regenerated every n steps
  double row_norm_clip = 0.0;  // 0: unbounded rows
};

struct EpochStats {
  int epoch = 0;
  double objective = 0.0;       // effective minibatch objective, epoch mean
  double validation_ll = 0.0;   // mean held-out log-likelihood
  std::string regime;           // negative regime, "none" for plain MLE
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  StopReason stop_reason = StopReason::kMaxIters;
  int iterations = 0;  // epochs run
  std::int64_t steps = 0;
  int pathological_warnings = 0;  // negatives below the log-probability floor
  int skipped_samples = 0;        // samples dropped on singular minors
  std::string abort_diagnostic;
};

/// Anything below this log-probability marks a negative sample as
/// pathological: it is warned about and dropped from the gradient, which is
/// what keeps the CE objective from diverging through the negative term.
inline constexpr double kPathologicalFloor = -700.0;

struct StepLog {
  int skipped = 0;
  int pathological = 0;
  double objective = 0.0;
};

/// One stochastic gradient ascent update V <- V + eta * (grad - reg_grad).
/// Samples with singular minors are skipped and logged; the factorized form
/// keeps the kernel positive semi-definite with no projection. negatives may
/// be null (plain MLE step).
KernelFactor sga_step(const KernelFactor& factor,
                      std::span<const Basket> positives,
                      const NegativeBatch* negatives,
                      const EmpiricalStats& stats, const TrainConfig& config,
                      double step_size, StepLog* log = nullptr);

/// True once the last relative change of the validation log-likelihood drops
/// below epsilon; absolute change is used when the previous value is 0.
bool check_convergence(std::span<const double> validation_history,
                       double epsilon);

/// Step size for gradient step t (0-based).
double step_size_at(std::int64_t t, const TrainConfig& config);

/// Minibatch stochastic gradient ascent on the configured objective.
/// Dynamic CE regenerates its negatives from the current factor every
/// refresh_every steps; static regimes draw fresh samples from their fixed
/// distribution each step. Stops when the validation criterion fires or
/// max_iters epochs elapse; a numerical blow-up aborts and returns the last
/// finite checkpoint.
std::pair<KernelFactor, TrainReport> train(const Corpus& corpus,
                                           const TrainConfig& config);

}  // namespace dppce
