// Test-only reference implementations: everything here works on the
// materialized M x M kernel or by brute-force subset enumeration, never
// through the low-rank code paths it is used to check.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dppce/kernel_factor.hpp"
#include "dppce/rng.hpp"

namespace dppce::oracle {

inline Matrix full_kernel(const KernelFactor& factor) {
  return factor.values() * factor.values().transpose();
}

// det of the principal minor indexed by `items`, by plain LU on the dense
// submatrix.
inline double minor_det(const Matrix& kernel, std::span<const ItemIndex> items) {
  if (items.empty()) return 1.0;
  Matrix sub(items.size(), items.size());
  for (std::size_t r = 0; r < items.size(); ++r)
    for (std::size_t c = 0; c < items.size(); ++c)
      sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          kernel(items[r], items[c]);
  return sub.determinant();
}

inline double minor_log_det(const Matrix& kernel,
                            std::span<const ItemIndex> items) {
  const double det = minor_det(kernel, items);
  if (det <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(det);
}

// All 2^M subsets as index lists, the empty set first.
inline std::vector<std::vector<ItemIndex>> all_subsets(ItemIndex num_items) {
  std::vector<std::vector<ItemIndex>> subsets;
  subsets.reserve(std::size_t{1} << num_items);
  for (std::uint32_t mask = 0; mask < (1u << num_items); ++mask) {
    std::vector<ItemIndex> items;
    for (ItemIndex i = 0; i < num_items; ++i)
      if (mask & (1u << i)) items.push_back(i);
    subsets.push_back(std::move(items));
  }
  return subsets;
}

// log sum_{A subseteq Y} det(L_A), which equals log det(L + I).
inline double enumerated_log_partition(const Matrix& kernel) {
  double sum = 0.0;
  for (const auto& subset :
       all_subsets(static_cast<ItemIndex>(kernel.rows())))
    sum += minor_det(kernel, subset);
  return std::log(sum);
}

inline bool contains_all(std::span<const ItemIndex> haystack,
                         std::span<const ItemIndex> needles) {
  for (ItemIndex n : needles) {
    bool found = false;
    for (ItemIndex h : haystack)
      if (h == n) found = true;
    if (!found) return false;
  }
  return true;
}

// Pr(i in Y | A subseteq Y) for every i, by summing determinants over all
// supersets of A. Entries at items of A are left at 1 (they are observed).
inline Vector enumerated_conditional_marginals(
    const Matrix& kernel, std::span<const ItemIndex> observed) {
  const auto m = static_cast<ItemIndex>(kernel.rows());
  Vector numerator = Vector::Zero(m);
  double denominator = 0.0;
  for (const auto& subset : all_subsets(m)) {
    if (!contains_all(subset, observed)) continue;
    const double det = minor_det(kernel, subset);
    denominator += det;
    for (ItemIndex i : subset) numerator[i] += det;
  }
  return numerator / denominator;
}

// Normalized next-item distribution: det(L_{A+j}) / sum_j' det(L_{A+j'}).
inline Vector enumerated_extension_distribution(
    const Matrix& kernel, std::span<const ItemIndex> base) {
  const auto m = static_cast<ItemIndex>(kernel.rows());
  Vector scores = Vector::Zero(m);
  for (ItemIndex j = 0; j < m; ++j) {
    bool in_base = false;
    for (ItemIndex b : base)
      if (b == j) in_base = true;
    if (in_base) continue;
    std::vector<ItemIndex> extended(base.begin(), base.end());
    extended.push_back(j);
    scores[j] = std::max(0.0, minor_det(kernel, extended));
  }
  return scores / scores.sum();
}

// Central finite differences of a scalar function of the factor entries.
inline Matrix finite_difference_gradient(
    const KernelFactor& factor,
    const std::function<double(const KernelFactor&)>& f, double step = 1e-5) {
  Matrix grad(factor.num_items(), factor.rank());
  for (ItemIndex i = 0; i < factor.num_items(); ++i) {
    for (int k = 0; k < factor.rank(); ++k) {
      Matrix hi = factor.values();
      Matrix lo = factor.values();
      hi(i, k) += step;
      lo(i, k) -= step;
      grad(i, k) =
          (f(KernelFactor(hi)) - f(KernelFactor(lo))) / (2.0 * step);
    }
  }
  return grad;
}

inline double max_relative_error(const Matrix& got, const Matrix& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index k = 0; k < got.cols(); ++k) {
      const double scale = std::max(1.0, std::abs(want(i, k)));
      worst = std::max(worst, std::abs(got(i, k) - want(i, k)) / scale);
    }
  }
  return worst;
}

inline KernelFactor random_factor(ItemIndex num_items, int rank,
                                  std::uint64_t seed) {
  Rng rng(seed);
  Matrix v(num_items, rank);
  for (ItemIndex i = 0; i < num_items; ++i)
    for (int k = 0; k < rank; ++k) v(i, k) = rng.unit() * 2.0 - 1.0;
  return KernelFactor(std::move(v));
}

// Pearson statistic against expected counts; cells with tiny expectation are
// pooled into the last bucket by the caller.
inline double chi_square_statistic(std::span<const double> observed,
                                   std::span<const double> expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// Upper critical values at significance 0.001 for df = 1..12.
inline double chi_square_critical_001(int df) {
  static constexpr double kTable[] = {10.828, 13.816, 16.266, 18.467,
                                      20.515, 22.458, 24.322, 26.124,
                                      27.877, 29.588, 31.264, 32.909};
  return kTable[df - 1];
}

}  // namespace dppce::oracle
