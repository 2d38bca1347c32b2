#pragma once

// Central finite-difference gradient oracle. Independent of the autodiff
// path: it re-runs the forward build around perturbed parameter entries and
// compares the numeric slope against the analytic gradient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "coldoc/tensor.hpp"

namespace gradcheck {

inline double rel_err(double analytic, double numeric) {
  return std::fabs(analytic - numeric) /
         std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

struct Report {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

/// build() must construct a fresh scalar graph from the current parameter
/// values. Every element of every parameter is perturbed by +-eps.
inline Report check(const std::function<coldoc::Tensor()>& build,
                    std::vector<coldoc::Tensor> params, double eps = 1e-5) {
  for (auto& p : params) p.zero_grad();
  build().backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  Report rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& data = params[pi].raw_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      double saved = data[i];
      data[i] = saved + eps;
      double fp = build().value();
      data[i] = saved - eps;
      double fm = build().value();
      data[i] = saved;
      double numeric = (fp - fm) / (2.0 * eps);
      rep.max_rel_err = std::max(rep.max_rel_err, rel_err(analytic[pi][i], numeric));
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace gradcheck
