#pragma once

#include <cstdint>
#include <vector>

#include "aublend/ad/nn.hpp"

namespace aublend::ad {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Bias-corrected Adam update of every parameter that holds a gradient,
// then clears all gradients. Moments are allocated on the first call and
// must keep matching the parameter shapes afterwards.
void adam_step(AdamState& state, const ParamList& params);

}  // namespace aublend::ad
