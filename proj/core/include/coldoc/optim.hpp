#pragma once

#include <cstdint>
#include <vector>

#include "coldoc/model.hpp"

namespace coldoc {

/// Adam moment buffers, one pair per parameter in ParamSet order.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t t = 0;

  static AdamState init(const ParamSet& params);
};

/// One Adam update with bias correction (beta1 0.9, beta2 0.999, eps 1e-8)
/// and decoupled weight decay applied multiplicatively before the step.
/// Reads gradients accumulated on the parameters; does not clear them.
void adam_step(ParamSet& params, AdamState& state, double lr, double weight_decay);

}  // namespace coldoc
