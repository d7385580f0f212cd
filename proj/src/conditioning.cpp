#include "dppce/conditioning.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dppce/errors.hpp"

namespace dppce {

namespace {

void check_sorted_unique(ItemSpan items, ItemIndex num_items) {
  check_items(items, num_items);
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i] <= items[i - 1])
      throw InputError("conditioning: items must be sorted and unique");
  }
}

// Cholesky of the observed items' feature Gram V_A·V_Aᵀ, with one jitter
// retry (1e-12 on the diagonal) before declaring the set zero-probability.
Eigen::LLT<Matrix> gram_cholesky(const Matrix& gram) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success) return llt;
  Matrix jittered = gram;
  jittered.diagonal().array() += 1e-12;
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) return llt;
  throw ConditionError("observed set has zero probability");
}

}  // namespace

DualKernel dual_kernel(const KernelFactor& factor) {
  const Matrix& v = factor.values();
  Matrix c = v.transpose() * v;
  c = ((c + c.transpose()) * 0.5).eval();  // exact symmetry
  return DualKernel{std::move(c)};
}

ConditionedState condition(const DualKernel& dual, const KernelFactor& factor,
                           ItemSpan observed) {
  const int k = factor.rank();
  if (dual.matrix.rows() != k || dual.matrix.cols() != k)
    throw InputError("condition: dual kernel does not match factor rank");
  check_sorted_unique(observed, factor.num_items());

  ConditionedState state;
  state.conditioned_set.assign(observed.begin(), observed.end());

  Matrix z = Matrix::Identity(k, k);
  if (!observed.empty()) {
    const Matrix va = factor.rows(observed);         // |A| x K
    const auto llt = gram_cholesky(va * va.transpose());
    // Z^A = I - B_A (B_Aᵀ B_A)^{-1} B_Aᵀ with B_A = V_Aᵀ
    z.noalias() -= va.transpose() * llt.solve(va);
  }

  state.conditioned_features.noalias() = z * factor.values().transpose();
  Matrix ca = z * dual.matrix * z;
  ca = ((ca + ca.transpose()) * 0.5).eval();
  state.conditioned_dual = std::move(ca);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(state.conditioned_dual);
  if (eig.info() != Eigen::Success)
    throw ConditionError("condition: eigendecomposition failed");
  state.eigenvalues = eig.eigenvalues();
  state.eigenvectors = eig.eigenvectors();
  return state;
}

Vector conditional_marginals(const ConditionedState& state) {
  const Eigen::Index m = state.conditioned_features.cols();
  const Eigen::Index k = state.conditioned_features.rows();

  // P_i = sum_n (λ_n/(λ_n+1)) ((1/sqrt(λ_n)) b_i^A · v̂_n)², null directions
  // skipped.
  Vector coeff(k);
  for (Eigen::Index n = 0; n < k; ++n) {
    const double lam = state.eigenvalues[n];
    coeff[n] = lam <= 1e-12 ? 0.0 : (lam / (lam + 1.0)) / lam;
  }
  const Matrix proj =
      state.conditioned_features.transpose() * state.eigenvectors;  // M x K
  Vector p = proj.array().square().matrix() * coeff;

  for (ItemIndex i : state.conditioned_set) p[i] = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) p[i] = std::clamp(p[i], 0.0, 1.0);
  return p;
}

ExtensionScores extension_scores(const KernelFactor& factor, ItemSpan base) {
  check_sorted_unique(base, factor.num_items());
  const Matrix& v = factor.values();

  ExtensionScores out;
  if (base.empty()) {
    out.scores = v.rowwise().squaredNorm();
  } else {
    const Matrix vb = factor.rows(base);  // |A| x K
    const auto llt = gram_cholesky(vb * vb.transpose());
    const Matrix t = v * vb.transpose();                    // M x |A|
    const Matrix x = llt.solve(t.transpose());              // |A| x M
    out.scores = v.rowwise().squaredNorm() -
                 (t.array() * x.transpose().array()).rowwise().sum().matrix();
    for (ItemIndex i : base) out.scores[i] = 0.0;
    out.scores = out.scores.cwiseMax(0.0);  // PSD up to round-off
  }
  out.total = out.scores.sum();
  return out;
}

Vector primal_conditional_marginals(const KernelFactor& factor,
                                    ItemSpan observed) {
  check_sorted_unique(observed, factor.num_items());
  const Matrix& v = factor.values();
  const ItemIndex m = factor.num_items();
  const int k = factor.rank();

  std::vector<ItemIndex> complement;
  complement.reserve(m - observed.size());
  {
    std::size_t pos = 0;
    for (ItemIndex i = 0; i < m; ++i) {
      if (pos < observed.size() && observed[pos] == i) {
        ++pos;
      } else {
        complement.push_back(i);
      }
    }
  }

  // Conditional factor rows w_j = Z^A v_j for j in the complement.
  Matrix w(complement.size(), k);
  for (std::size_t r = 0; r < complement.size(); ++r)
    w.row(static_cast<Eigen::Index>(r)) = v.row(complement[r]);
  if (!observed.empty()) {
    const Matrix va = factor.rows(observed);
    const auto llt = gram_cholesky(va * va.transpose());
    w.noalias() -= (w * va.transpose()) * llt.solve(va);
  }

  // Materialized conditional kernel and the marginals
  // P_j = [L^A (L^A + I)^{-1}]_jj computed from it via
  // (L^A + I)^{-1} = I - W (I + WᵀW)^{-1} Wᵀ.
  const Matrix kernel = w * w.transpose();  // |Ā| x |Ā|, the quadratic cost
  Matrix s = w.transpose() * w;
  s.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt_s(s);
  const Matrix kw = kernel * w;  // |Ā| x K
  const Matrix corr = llt_s.solve(kw.transpose());  // K x |Ā|
  Vector p = Vector::Zero(m);
  for (std::size_t r = 0; r < complement.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    p[complement[r]] =
        std::clamp(kernel(rr, rr) - corr.col(rr).dot(w.row(rr)), 0.0, 1.0);
  }
  return p;
}

}  // namespace dppce
