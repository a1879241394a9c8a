#pragma once

// Central finite-difference oracle. Independent of the reverse-mode code
// path: it only ever evaluates the forward loss.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "aublend/ad/nn.hpp"

namespace gradcheck {

struct Result {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[i]"
  std::size_t checked = 0;
};

// Element error: |a - n| / max(|a|, |n|); elements where both magnitudes
// and their difference sit under the absolute floor count as exact.
inline double element_error(double analytic, double numeric, double floor = 1e-8) {
  const double diff = std::fabs(analytic - numeric);
  const double mag = std::max(std::fabs(analytic), std::fabs(numeric));
  if (mag < floor) return diff < floor ? 0.0 : diff / floor;
  return diff / mag;
}

// Tape gradient of `analytic_loss` against central differences (step h)
// of `numeric_loss`; second order by default, fourth order (five-point
// stencil) with `five_point`, which tolerates a larger step and so less
// rounding noise on tiny gradient elements. The two usually coincide; they differ when the tape
// graph uses stop-gradient style ops and the numeric side is a surrogate
// with those inputs held constant.
inline Result check_against(const std::function<aublend::ad::Tensor()>& analytic_loss,
                            const std::function<aublend::ad::Tensor()>& numeric_loss,
                            const aublend::ad::ParamList& params, double h = 1e-5, double floor = 1e-8,
                            bool five_point = false) {
  using aublend::ad::Tensor;
  const auto& build_loss = numeric_loss;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
  analytic_loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) {
    auto g = p.tensor.grad();
    analytic.emplace_back(p.tensor.numel(), 0.0);
    std::copy(g.begin(), g.end(), analytic.back().begin());
  }
  Result r;
  aublend::ad::NoGradGuard guard;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    auto x = t.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      auto at = [&](double step) {
        x[i] = saved + step;
        const double v = build_loss().item();
        x[i] = saved;
        return v;
      };
      const double numeric = five_point ? (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
                                        : (at(h) - at(-h)) / (2.0 * h);
      const double e = element_error(analytic[k][i], numeric, floor);
      ++r.checked;
      if (e > r.max_rel_error) {
        r.max_rel_error = e;
        r.worst = params[k].name + "[" + std::to_string(i) + "] analytic=" + std::to_string(analytic[k][i]) +
                  " numeric=" + std::to_string(numeric);
      }
    }
  }
  return r;
}

// Compares the analytic gradient of build_loss() w.r.t. every tensor in
// params against central differences with step h.
inline Result check(const std::function<aublend::ad::Tensor()>& build_loss, const aublend::ad::ParamList& params,
                    double h = 1e-5, double floor = 1e-8) {
  return check_against(build_loss, build_loss, params, h, floor);
}

}  // namespace gradcheck
