#pragma once

// Tiny model configuration and held-fixed surrogate objectives for
// gradient checks.
//
// The training objectives contain stop_gradient and straight_through, so
// their tape gradient is not the derivative of their forward value. The
// surrogates below evaluate the same forward value at the base point but
// treat every stop-gradient input and the straight-through offset as a
// constant captured at that point; their true derivative is what the tape
// should produce. The sign of the reconstruction residual is held fixed the
// same way, so |r| becomes s0 * r, which agrees with |r| near the base point
// but has no kink for a finite-difference step to straddle. They are written
// from primitive ops, not from the library's loss functions.

#include <vector>

#include "aublend/ad/ops.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/losses.hpp"
#include "aublend/model/styleblend.hpp"
#include "fixtures.hpp"

namespace model_fixtures {

using aublend::ad::Tensor;

inline aublend::model::HyperParams tiny_hp() {
  aublend::model::HyperParams hp;
  hp.width = 3 * 75;
  hp.latent = 8;
  hp.codebook_size = 4;
  hp.layers = 1;
  hp.heads = 2;
  hp.ffn_mult = 2;
  hp.basis_scale = 0.05;
  hp.template_scale = 0.5;
  return hp;
}

// Overwrites every parameter with uniform noise so that no gradient path
// is trivially zero (zero-initialised heads and gates included).
inline void randomize(const aublend::ad::ParamList& params, std::uint64_t seed, double amp = 0.3) {
  aublend::Rng rng(seed);
  for (const auto& p : params) {
    Tensor t = p.tensor;
    for (auto& v : t.data()) v = rng.uniform(-amp, amp);
  }
}

inline Tensor constant_of(const Tensor& t) { return t.clone(false); }

inline Tensor random_bases_tensor(aublend::Rng& rng, const aublend::model::HyperParams& hp, double amp = 0.05) {
  std::vector<double> v(hp.tokens * hp.width);
  for (auto& x : v) x = rng.uniform(-amp, amp);
  return Tensor({hp.tokens, hp.width}, std::move(v));
}

// mean(s0 * (B - D(Z + c))) + mean((Z0 - Zq)^2) + beta * mean((Z - Zq0)^2),
// with c = Zq0 - Z0, and Z0, Zq0, s0 = sign(B - D(Zq0)) the base-point values.
struct CodebookSurrogate {
  const aublend::model::CodebookModel& m;
  Tensor b;
  std::vector<std::size_t> indices;
  Tensor z0, zq0, offset, sign0;

  CodebookSurrogate(const aublend::model::CodebookModel& model, Tensor bases, std::vector<std::size_t> idx)
      : m(model), b(std::move(bases)), indices(std::move(idx)) {
    aublend::ad::NoGradGuard g;
    z0 = constant_of(aublend::model::encode(m, b));
    zq0 = constant_of(aublend::ad::gather_rows(m.codebook, indices));
    offset = aublend::ad::sub(zq0, z0);
    const Tensor r = aublend::ad::sub(b, aublend::model::decode(m, zq0));
    std::vector<double> s(r.numel());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = r.values()[i] > 0.0 ? 1.0 : (r.values()[i] < 0.0 ? -1.0 : 0.0);
    sign0 = Tensor(r.shape(), std::move(s));
  }

  Tensor operator()() const {
    using namespace aublend::ad;
    Tensor z = aublend::model::encode(m, b);
    Tensor zq = gather_rows(m.codebook, indices);
    Tensor b_hat = aublend::model::decode(m, add(z, offset));
    Tensor recon = mean(mul(sub(b, b_hat), sign0));
    Tensor book = mean(square(sub(z0, zq)));
    Tensor commit = mean(square(sub(z, zq0)));
    return add(add(recon, book), scale(commit, m.hp.beta));
  }
};

// mean((B - D(Zhat + c))^2) + mean((Zhat - Zq0)^2), with c = Zp0 - Zhat0 and
// Zp0 the predicted-index entries at the base point.
struct StyleBlendSurrogate {
  const aublend::model::StyleBlendModel& s;
  const aublend::model::CodebookModel& c;
  aublend::mesh::FaceMesh templ;
  Tensor b;
  Tensor zq0, offset;

  StyleBlendSurrogate(const aublend::model::StyleBlendModel& style, const aublend::model::CodebookModel& codebook,
                      aublend::mesh::FaceMesh t, Tensor bases, const std::vector<std::size_t>& target,
                      const std::vector<std::size_t>& pred)
      : s(style), c(codebook), templ(std::move(t)), b(std::move(bases)) {
    aublend::ad::NoGradGuard g;
    const Tensor zhat0 = constant_of(aublend::model::styleblend_tokens(s, templ));
    zq0 = constant_of(aublend::ad::gather_rows(c.codebook, target));
    offset = aublend::ad::sub(constant_of(aublend::ad::gather_rows(c.codebook, pred)), zhat0);
  }

  Tensor operator()() const {
    using namespace aublend::ad;
    Tensor zhat = aublend::model::styleblend_tokens(s, templ);
    Tensor b_pred = aublend::model::decode(c, add(zhat, offset));
    return add(mean(square(sub(b, b_pred))), mean(square(sub(zhat, zq0))));
  }
};

}  // namespace model_fixtures
