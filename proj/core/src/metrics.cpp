#include "coldoc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "coldoc/errors.hpp"

namespace coldoc {

EvalResult compute_metrics(const std::vector<LabeledScore>& scored, double threshold) {
  EvalResult r;
  r.threshold = threshold;
  r.total = scored.size();
  for (const LabeledScore& s : scored) {
    bool pred = s.score > threshold;
    if (s.positive) {
      ++r.positives;
      pred ? ++r.tp : ++r.fn;
    } else {
      ++r.negatives;
      pred ? ++r.fp : ++r.tn;
    }
  }
  r.precision = (r.tp + r.fp) > 0 ? double(r.tp) / double(r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) > 0 ? double(r.tp) / double(r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.accuracy = r.total > 0 ? double(r.tp + r.tn) / double(r.total) : 0.0;
  return r;
}

double select_threshold(const std::vector<LabeledScore>& scored) {
  bool has_pos = false, has_neg = false;
  for (const LabeledScore& s : scored) (s.positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw data_error("select_threshold: need at least one positive and one negative pair");
  }
  std::vector<double> values;
  values.reserve(scored.size());
  for (const LabeledScore& s : scored) values.push_back(s.score);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() < 2) {
    throw data_error("select_threshold: all scores identical, no candidate thresholds");
  }

  double best_thr = 0.0, best_f1 = -1.0, best_margin = -1.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    double thr = 0.5 * (values[i] + values[i + 1]);
    double margin = 0.5 * (values[i + 1] - values[i]);
    double f1 = compute_metrics(scored, thr).f1;
    bool better = f1 > best_f1 ||
                  (f1 == best_f1 && (margin > best_margin ||
                                     (margin == best_margin && thr < best_thr)));
    if (better) {
      best_f1 = f1;
      best_margin = margin;
      best_thr = thr;
    }
  }
  return best_thr;
}

}  // namespace coldoc
