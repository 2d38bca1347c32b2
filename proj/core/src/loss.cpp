#include "coldoc/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "coldoc/errors.hpp"

namespace coldoc {

Tensor supcon_loss(const LossBatch& batch) {
  if (!(batch.tau > 0.0)) {
    throw config_error("supcon_loss: temperature must be positive, got " +
                       std::to_string(batch.tau));
  }
  std::size_t n = batch.z.size();
  if (n < 2 || batch.labels.size() != n) {
    throw std::logic_error("supcon_loss: need >= 2 rows with matching labels");
  }
  std::vector<std::size_t> label_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (batch.labels[i] == batch.labels[j]) ++label_count[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label_count[i] < 2) {
      throw std::logic_error("supcon_loss: row " + std::to_string(i) + " (label " +
                             std::to_string(batch.labels[i]) + ") has no positive partner");
    }
  }

  Tensor zmat = stack_rows(batch.z);                              // [n, d]
  Tensor logits = scale(matmul(zmat, transpose(zmat)), 1.0 / batch.tau);  // [n, n]

  // denominators exclude the anchor itself
  std::vector<double> off_diag(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) off_diag[i * n + i] = 0.0;
  Tensor denom = sum(mul(exp(logits), Tensor::from_data({n, n}, std::move(off_diag))), 1);
  Tensor log_denom = reshape(log(denom), {n, 1});                 // broadcast over columns

  // positive-pair weights: 1/(m_i - 1) at (i, j) for j != i with equal labels
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && batch.labels[i] == batch.labels[j]) {
        w[i * n + j] = 1.0 / static_cast<double>(label_count[i] - 1);
      }
    }
  }
  Tensor weights = Tensor::from_data({n, n}, std::move(w));
  return sum_all(mul(weights, sub(log_denom, logits)));
}

double supcon_loss_oracle(const std::vector<std::vector<double>>& z,
                          const std::vector<int>& labels, double tau) {
  if (!(tau > 0.0)) {
    throw config_error("supcon_loss_oracle: temperature must be positive");
  }
  std::size_t n = z.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (labels[t] == labels[i]) ++m;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      double sij = 0.0;
      for (std::size_t c = 0; c < z[i].size(); ++c) sij += z[i][c] * z[j][c];
      double denom = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        double sik = 0.0;
        for (std::size_t c = 0; c < z[i].size(); ++c) sik += z[i][c] * z[k][c];
        denom += std::exp(sik / tau);
      }
      loss += (-1.0 / static_cast<double>(m - 1)) * std::log(std::exp(sij / tau) / denom);
    }
  }
  return loss;
}

Tensor cosine_objective(const Tensor& z_a, const Tensor& z_b, bool same_label) {
  double na = 0.0, nb = 0.0;
  for (double v : z_a.values()) na += v * v;
  for (double v : z_b.values()) nb += v * v;
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine_objective: zero vector");
  }
  Tensor cos = dot(l2_normalize(z_a), l2_normalize(z_b));
  Tensor diff = sub(cos, Tensor::scalar(same_label ? 1.0 : -1.0));
  return mul(diff, diff);
}

}  // namespace coldoc
