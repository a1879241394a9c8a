#pragma once

#include <vector>

#include "aublend/ad/nn.hpp"
#include "aublend/mesh/mesh.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/hyper.hpp"

namespace aublend::model {

struct ConvLayer {
  ad::Tensor weight;  // (K*Cin) x Cout
  ad::Tensor bias;    // 1 x Cout
  std::size_t dilation = 1;
};

// Expands the 1 x W template into N x C pseudo-time steps: the row is tiled
// N times, a learned per-token embedding is added, then a causal dilated
// conv stack runs over the tokens (GELU, residual after the first layer).
struct Tcn {
  ad::Tensor position;  // N x W
  std::vector<ConvLayer> layers;
  std::size_t kernel = 3;

  ad::Tensor operator()(const ad::Tensor& m) const;
  void collect(ad::ParamList& out, const std::string& prefix) const;
};

struct Modulation {
  ad::Tensor gamma1, beta1, alpha1, gamma2, beta2, alpha2;  // each 1 x D
};

// AdaLN-Zero block: x + a1 * MHSA(LN(x) g1 + b1), then x + a2 * MLP(LN(x) g2 + b2).
// The modulation producer maps the style vector to (g1, b1, a1, g2, b2, a2);
// its alpha columns start at zero, so a fresh block is the identity.
struct AdaLNBlock {
  ad::Linear modulation;  // D -> 6D
  ad::Attention attn;
  ad::Linear fc1;
  ad::Linear fc2;

  static AdaLNBlock init(Rng& rng, std::size_t width, std::size_t heads, std::size_t ffn_mult);
  Modulation modulate(const ad::Tensor& style) const;
  ad::Tensor operator()(const ad::Tensor& x, const ad::Tensor& style) const;
  void collect(ad::ParamList& out, const std::string& prefix) const;
};

struct StyleBlendModel {
  HyperParams hp;
  ad::Tensor template_mean;  // 1 x W, fixed (not trained)
  Tcn tcn;
  ad::Linear proj1, proj2;    // MLP_f
  ad::Tensor anchor;          // N x D per-AU offset added to the MLP_f output; zero until set from data
  ad::Linear style1, style2;  // MLP_s
  std::vector<AdaLNBlock> blocks;
  ad::Linear head;  // D -> D, identity at init

  static StyleBlendModel init(const HyperParams& hp, std::uint64_t seed, std::vector<double> template_mean = {});

  ad::ParamList params() const;  // learnable tensors only
  ad::ParamList buffers() const;  // fixed tensors stored with the checkpoint
};

// Template positions as 1 x W, normalised with the model's fixed statistics.
ad::Tensor template_input(const StyleBlendModel& s, const mesh::FaceMesh& templ);

struct StyleTokens {
  ad::Tensor projected;  // MLP_f(TCN(M)) + anchor, the AdaLN stack input
  ad::Tensor style;      // MLP_s(M)
  ad::Tensor tokens;     // Z_hat
};

// ShapeError if the template's width differs from the model's.
StyleTokens styleblend_forward(const StyleBlendModel& s, const mesh::FaceMesh& templ);
ad::Tensor styleblend_tokens(const StyleBlendModel& s, const mesh::FaceMesh& templ);

struct Prediction {
  mesh::BasisSet bases;
  std::vector<std::size_t> indices;
};

// decode(quantize(Z_hat)) in one parallel pass.
Prediction predict_basis(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                         const std::vector<mesh::AuId>& ids);

}  // namespace aublend::model
