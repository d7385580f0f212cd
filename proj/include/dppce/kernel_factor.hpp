#pragma once

#include <Eigen/Dense>

#include "dppce/basket.hpp"
#include "dppce/rng.hpp"

namespace dppce {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Low-rank factor V of the DPP kernel L = V·Vᵀ. Row i is item i's feature
/// vector. Keeping only V guarantees L is symmetric PSD; the full M×M kernel
/// is never materialized outside test oracles.
class KernelFactor {
 public:
  explicit KernelFactor(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw InputError("kernel factor: needs at least one row and column");
    if (values_.cols() > values_.rows())
      throw InputError("kernel factor: rank exceeds number of items");
    if (!values_.allFinite())
      throw InputError("kernel factor: non-finite entries");
  }

  ItemIndex num_items() const { return static_cast<ItemIndex>(values_.rows()); }
  int rank() const { return static_cast<int>(values_.cols()); }

  const Matrix& values() const { return values_; }

  /// Rows of V indexed by the basket, stacked in basket order.
  Matrix rows(ItemSpan items) const {
    Matrix out(items.size(), values_.cols());
    for (std::size_t r = 0; r < items.size(); ++r)
      out.row(static_cast<Eigen::Index>(r)) = values_.row(items[r]);
    return out;
  }

  /// i.i.d. uniform [0,1) entries scaled by 1/sqrt(K): nonzero minors with
  /// probability 1, so no basket starts at -inf log-likelihood.
  static KernelFactor random_init(ItemIndex num_items, int rank, Rng& rng) {
    Matrix v(num_items, rank);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
    for (ItemIndex i = 0; i < num_items; ++i)
      for (int k = 0; k < rank; ++k) v(i, k) = rng.unit() * scale;
    return KernelFactor(std::move(v));
  }

 private:
  Matrix values_;
};

}  // namespace dppce
