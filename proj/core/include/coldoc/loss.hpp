#pragma once

#include <vector>

#include "coldoc/tensor.hpp"

namespace coldoc {

/// One contrastive batch: a projected section row per entry plus its
/// document label. For a batch of N documents with n_p sections each this
/// holds n_p * N rows.
struct LossBatch {
  std::vector<Tensor> z;   // rank-1 rows, equal length
  std::vector<int> labels; // one per row
  double tau = 0.5;
};

/// Supervised contrastive loss, the literal double sum: for every anchor i
/// and positive j != i with equal labels,
///   -1/(m_i - 1) * log( exp(z_i.z_j/tau) / sum_{k != i} exp(z_i.z_k/tau) )
/// where m_i is the number of rows sharing anchor i's label. Differentiable
/// with respect to every z row.
Tensor supcon_loss(const LossBatch& batch);

/// Independent naive evaluation of the same formula: plain triple loop over
/// doubles, no tensors, no shared subexpressions. Verification oracle for
/// small batches.
double supcon_loss_oracle(const std::vector<std::vector<double>>& z,
                          const std::vector<int>& labels, double tau);

/// Cosine-similarity regression objective (contrastive-loss ablation):
/// (cos(a, b) - target)^2 with target +1 for same-label pairs, -1 otherwise.
Tensor cosine_objective(const Tensor& z_a, const Tensor& z_b, bool same_label);

}  // namespace coldoc
