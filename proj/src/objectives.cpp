#include "dppce/objectives.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace dppce {

namespace {

// log det of a symmetric PSD matrix via Cholesky; nullopt when the
// factorization fails, which we treat as singular.
std::optional<double> log_det_psd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

double stable_sigmoid(double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_det_restricted(const KernelFactor& factor, const Basket& basket) {
  basket.check_against(factor.num_items());
  if (basket.size() > static_cast<std::size_t>(factor.rank())) return kNegInf;
  const Matrix va = factor.rows(basket.span());
  const auto ld = log_det_psd(va * va.transpose());
  return ld ? *ld : kNegInf;
}

double log_normalizer(const KernelFactor& factor) {
  const Matrix& v = factor.values();
  Matrix s = v.transpose() * v;
  s.diagonal().array() += 1.0;
  // Eigenvalues of I + VᵀV are >= 1, so this cannot fail for finite V.
  const auto ld = log_det_psd(s);
  return ld ? *ld : kPosInf;
}

double log_prob(const KernelFactor& factor, const Basket& basket) {
  const double ld = log_det_restricted(factor, basket);
  if (ld == kNegInf) return kNegInf;
  return ld - log_normalizer(factor);
}

NormalizerParts normalizer_parts(const KernelFactor& factor) {
  const Matrix& v = factor.values();
  Matrix s = v.transpose() * v;
  s.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(s);
  NormalizerParts out;
  out.log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  // d/dV log det(I + VᵀV) = 2 V (I + VᵀV)^{-1}
  out.grad = 2.0 * llt.solve(v.transpose()).transpose();
  return out;
}

RestrictedParts restricted_parts(const KernelFactor& factor,
                                 const Basket& basket) {
  basket.check_against(factor.num_items());
  RestrictedParts out;
  if (basket.size() > static_cast<std::size_t>(factor.rank())) return out;
  const Matrix va = factor.rows(basket.span());
  Eigen::LLT<Matrix> llt(va * va.transpose());
  if (llt.info() != Eigen::Success) return out;
  out.log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  // d/dV log det(V_A V_Aᵀ) = 2 (V_A V_Aᵀ)^{-1} V_A on rows of A, 0 elsewhere
  out.grad_rows = 2.0 * llt.solve(va);
  return out;
}

LogProbGrad log_prob_and_grad(const KernelFactor& factor,
                              const Basket& basket) {
  LogProbGrad out;
  RestrictedParts minor = restricted_parts(factor, basket);
  if (!minor.grad_rows) return out;
  const NormalizerParts norm = normalizer_parts(factor);
  out.log_prob = minor.log_det - norm.log_det;

  Matrix grad = -norm.grad;
  const auto& items = basket.items();
  for (std::size_t r = 0; r < items.size(); ++r)
    grad.row(items[r]) += minor.grad_rows->row(static_cast<Eigen::Index>(r));
  out.grad = std::move(grad);
  return out;
}

Matrix grad_log_prob(const KernelFactor& factor, const Basket& basket) {
  LogProbGrad lpg = log_prob_and_grad(factor, basket);
  if (!lpg.grad)
    throw GradientError("grad_log_prob: singular restricted minor");
  return std::move(*lpg.grad);
}

double regularizer_value(const KernelFactor& factor, Counts occurrence_counts,
                         double alpha) {
  if (occurrence_counts.size() != static_cast<std::size_t>(factor.num_items()))
    throw InputError("regularizer: occurrence counts size mismatch");
  if (alpha == 0.0) return 0.0;
  double sum = 0.0;
  const Matrix& v = factor.values();
  for (ItemIndex i = 0; i < factor.num_items(); ++i) {
    if (occurrence_counts[i] > 0)
      sum += v.row(i).squaredNorm() / static_cast<double>(occurrence_counts[i]);
  }
  return alpha * sum;
}

Matrix regularizer_gradient(const KernelFactor& factor,
                            Counts occurrence_counts, double alpha) {
  if (occurrence_counts.size() != static_cast<std::size_t>(factor.num_items()))
    throw InputError("regularizer: occurrence counts size mismatch");
  const Matrix& v = factor.values();
  Matrix grad = Matrix::Zero(v.rows(), v.cols());
  if (alpha == 0.0) return grad;
  for (ItemIndex i = 0; i < factor.num_items(); ++i) {
    if (occurrence_counts[i] > 0)
      grad.row(i) =
          (2.0 * alpha / static_cast<double>(occurrence_counts[i])) * v.row(i);
  }
  return grad;
}

ObjectiveValue ce_objective(const KernelFactor& factor,
                            std::span<const Basket> positives,
                            std::span<const Basket> negatives,
                            Counts occurrence_counts, double alpha) {
  if (positives.empty()) throw InputError("ce_objective: no positive baskets");

  const double log_norm = log_normalizer(factor);
  auto mean_log_prob = [&](std::span<const Basket> baskets) {
    double sum = 0.0;
    for (const Basket& b : baskets) {
      const double ld = log_det_restricted(factor, b);
      if (ld == kNegInf) return kNegInf;
      sum += ld - log_norm;
    }
    return sum / static_cast<double>(baskets.size());
  };

  ObjectiveValue out;
  out.positive_term = mean_log_prob(positives);
  out.negative_term = negatives.empty() ? 0.0 : mean_log_prob(negatives);
  out.regularizer = regularizer_value(factor, occurrence_counts, alpha);
  if (out.positive_term == kNegInf) {
    out.total = kNegInf;  // bad model or bad init
  } else if (out.negative_term == kNegInf) {
    out.total = kPosInf;  // pathological negative sample
  } else {
    out.total = out.positive_term - out.negative_term - out.regularizer;
  }
  return out;
}

Matrix nce_gradient(const KernelFactor& factor, const Basket& basket,
                    bool is_positive, double noise_log_density, double ratio) {
  if (!std::isfinite(noise_log_density))
    throw InputError("nce_gradient: noise log-density must be finite");
  if (!(ratio > 0.0)) throw InputError("nce_gradient: ratio must be positive");

  const double lp = log_prob(factor, basket);
  const double sigma =
      lp == kNegInf
          ? 0.0
          : stable_sigmoid(lp - noise_log_density - std::log(ratio));
  const double scale = (is_positive ? 1.0 : 0.0) - sigma;
  if (scale == 0.0)
    return Matrix::Zero(factor.num_items(), factor.rank());
  return scale * grad_log_prob(factor, basket);
}

}  // namespace dppce
