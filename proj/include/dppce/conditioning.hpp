#pragma once

#include <vector>

#include "dppce/basket.hpp"
#include "dppce/kernel_factor.hpp"

namespace dppce {

/// K×K Gram of the factor's feature space, C = VᵀV. Shares its nonzero
/// spectrum with L = V·Vᵀ, which is what makes catalog-size-independent
/// core computations possible.
struct DualKernel {
  Matrix matrix;
};

DualKernel dual_kernel(const KernelFactor& factor);

/// Result of conditioning the DPP on "all items of A are observed", in dual
/// form. Immutable once built; safe to query from many threads.
///
/// conditioned_features is B^A = Z^A·Vᵀ (K×M) with Z^A the projection onto
/// the orthogonal complement of the observed items' feature span; its columns
/// indexed by A are numerically zero. conditioned_dual is C^A = Z^A·C·Z^A,
/// equal to B^A·(B^A)ᵀ.
struct ConditionedState {
  Matrix conditioned_dual;       // C^A, K×K
  Matrix conditioned_features;   // B^A, K×M
  Vector eigenvalues;            // of C^A
  Matrix eigenvectors;           // columns, paired with eigenvalues
  std::vector<ItemIndex> conditioned_set;
};

/// Builds the conditioned state in O(K³ + |A|³ + K²|A|² + M·K²) time.
/// observed must be sorted, duplicate-free, and may be empty (no-op
/// projection). Throws ConditionError when the observed set has zero
/// probability (singular feature Gram).
ConditionedState condition(const DualKernel& dual, const KernelFactor& factor,
                           ItemSpan observed);

/// Conditional inclusion marginals P_i = Pr(i ∈ Y | A ⊆ Y), one entry per
/// catalog item, clamped to [0,1]; entries at conditioned items are 0.
/// Null directions of C^A (eigenvalues <= 1e-12) carry no mass and are
/// skipped.
Vector conditional_marginals(const ConditionedState& state);

/// Unnormalized next-item scores s_j = L_jj - L_{jA}·L_A^{-1}·L_{Aj} for
/// j outside the base set (the Schur complement, i.e. the determinant ratio
/// det(L_{A∪{j}})/det(L_A)); zero at base items. total is the sum over the
/// complement, kept separate so callers can normalize when they need a
/// distribution.
struct ExtensionScores {
  Vector scores;
  double total = 0.0;
};

ExtensionScores extension_scores(const KernelFactor& factor, ItemSpan base);

/// Reference conditioning path that materializes the conditional kernel on
/// the complement at O(K·|Ā|²) cost. Numerically agrees with
/// conditional_marginals; retained as the quadratic baseline the dual path
/// is benchmarked against.
Vector primal_conditional_marginals(const KernelFactor& factor,
                                    ItemSpan observed);

}  // namespace dppce
