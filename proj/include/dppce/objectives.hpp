#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "dppce/basket.hpp"
#include "dppce/kernel_factor.hpp"

namespace dppce {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

using Counts = std::span<const std::int64_t>;

/// CE decomposition: total = positive_term - negative_term - regularizer.
/// negative_term is 0 for plain maximum likelihood.
struct ObjectiveValue {
  double total = 0.0;
  double positive_term = 0.0;
  double negative_term = 0.0;
  double regularizer = 0.0;
};

/// log det(V_A·V_Aᵀ); -inf when the minor is singular, which includes every
/// basket larger than the rank.
double log_det_restricted(const KernelFactor& factor, const Basket& basket);

/// log det(L + I_M), evaluated as log det(I_K + VᵀV).
double log_normalizer(const KernelFactor& factor);

/// log P_L(A) = log det(L_A) - log det(L + I).
double log_prob(const KernelFactor& factor, const Basket& basket);

/// Gradient of log_prob with respect to every entry of V. Rows outside the
/// basket carry only the normalizer contribution. Throws GradientError on a
/// singular minor.
Matrix grad_log_prob(const KernelFactor& factor, const Basket& basket);

/// log_prob and its gradient from one Cholesky pass; grad is absent when the
/// minor is singular (log_prob is then -inf).
struct LogProbGrad {
  double log_prob = kNegInf;
  std::optional<Matrix> grad;
};
LogProbGrad log_prob_and_grad(const KernelFactor& factor, const Basket& basket);

/// Shared normalizer pieces, computed once per factor and reused across a
/// minibatch: log det(I + VᵀV) and its gradient 2·V·(I + VᵀV)^{-1}.
struct NormalizerParts {
  double log_det = 0.0;
  Matrix grad;
};
NormalizerParts normalizer_parts(const KernelFactor& factor);

/// Per-basket pieces of log det(V_A·V_Aᵀ): the value and the |A|×K gradient
/// block 2·(V_A·V_Aᵀ)^{-1}·V_A (rows outside A are structurally zero).
/// grad_rows is absent when the minor is singular (log_det is then -inf).
struct RestrictedParts {
  double log_det = kNegInf;
  std::optional<Matrix> grad_rows;
};
RestrictedParts restricted_parts(const KernelFactor& factor,
                                 const Basket& basket);

/// R(V) = alpha * sum_i ||v_i||^2 / mu_i over items with mu_i > 0. Items never
/// seen in training are excluded rather than given infinite weight.
double regularizer_value(const KernelFactor& factor, Counts occurrence_counts,
                         double alpha);
Matrix regularizer_gradient(const KernelFactor& factor,
                            Counts occurrence_counts, double alpha);

/// Sample-approximated contrastive objective:
///   (1/|A+|) sum log P(A+)  -  (1/|A-|) sum log P(A-)  -  R(V).
/// Empty negatives reduce it exactly to the MLE objective minus R(V).
/// A singular positive minor yields total = -inf; a singular negative minor
/// yields total = +inf (the pathological case a negative distribution must
/// avoid).
ObjectiveValue ce_objective(const KernelFactor& factor,
                            std::span<const Basket> positives,
                            std::span<const Basket> negatives,
                            Counts occurrence_counts, double alpha);

/// Per-sample NCE gradient: (eps* - sigma(G)) * grad_log_prob, where
/// G = log P_L(A) - noise_log_density - log(ratio) and eps* is 1 for
/// positives, 0 for negatives. The sigmoid is evaluated in log space, so a
/// vanishing P_L(A) gives the full gradient for a positive and an exactly
/// zero matrix for a negative.
Matrix nce_gradient(const KernelFactor& factor, const Basket& basket,
                    bool is_positive, double noise_log_density, double ratio);

/// 1/(1+exp(-x)), stable for the whole real line including +-inf.
double stable_sigmoid(double x);

}  // namespace dppce
