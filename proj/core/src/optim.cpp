#include "coldoc/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace coldoc {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

AdamState AdamState::init(const ParamSet& params) {
  AdamState st;
  st.m.reserve(params.items().size());
  st.v.reserve(params.items().size());
  for (const auto& [name, t] : params.items()) {
    st.m.emplace_back(t.size(), 0.0);
    st.v.emplace_back(t.size(), 0.0);
  }
  return st;
}

void adam_step(ParamSet& params, AdamState& state, double lr, double weight_decay) {
  if (state.m.size() != params.items().size()) {
    throw std::logic_error("adam_step: state does not match parameter set");
  }
  state.t += 1;
  double bc1 = 1.0 - std::pow(kBeta1, double(state.t));
  double bc2 = 1.0 - std::pow(kBeta2, double(state.t));

  for (std::size_t pi = 0; pi < params.items().size(); ++pi) {
    Tensor t = params.items()[pi].second;
    const std::vector<double>& g = t.grad();
    std::vector<double>& x = t.raw_data();
    std::vector<double>& m = state.m[pi];
    std::vector<double>& v = state.v[pi];
    if (g.size() != x.size()) {
      throw std::logic_error("adam_step: gradient shape mismatch for " +
                             params.items()[pi].first);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      x[i] *= 1.0 - lr * weight_decay;
      x[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

}  // namespace coldoc
