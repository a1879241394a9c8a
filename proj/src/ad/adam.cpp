#include "aublend/ad/adam.hpp"

#include <cmath>

#include "aublend/error.hpp"

namespace aublend::ad {

AdamState make_adam(double lr, double beta1, double beta2, double eps) {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void adam_step(AdamState& state, const ParamList& params) {
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor.numel(), 0.0);
      state.second_moment.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ContractError("adam_step: parameter list changed between steps");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    if (m.size() != t.numel()) throw ContractError("adam_step: moment shape mismatch for " + params[k].name);
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto x = t.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      x[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    t.zero_grad();
  }
}

}  // namespace aublend::ad
