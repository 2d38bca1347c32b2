#pragma once

#include <cstddef>
#include <vector>

namespace coldoc {

/// Pair-classification outcome. f1 is 2PR/(P+R), 0 when undefined.
struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double threshold = 0.0;
  std::size_t total = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct LabeledScore {
  double score = 0.0;
  bool positive = false;  // gold
};

EvalResult compute_metrics(const std::vector<LabeledScore>& scored, double threshold);

/// F1-maximizing threshold over midpoints between consecutive distinct
/// sorted scores; ties broken toward the midpoint with the larger margin,
/// then toward the smaller threshold. Requires both classes present and at
/// least two distinct scores.
double select_threshold(const std::vector<LabeledScore>& scored);

}  // namespace coldoc
