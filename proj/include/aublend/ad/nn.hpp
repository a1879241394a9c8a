#pragma once

#include <string>
#include <vector>

#include "aublend/ad/ops.hpp"
#include "aublend/rng.hpp"

namespace aublend::ad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Flat, ordered view of a model's learnable tensors. Handles share storage
// with the model, so optimizers and checkpoint loaders write through them.
using ParamList = std::vector<NamedTensor>;

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, shape fan_in x fan_out.
Tensor uniform_fan_in(Rng& rng, std::size_t fan_in, std::size_t fan_out, double gain = 1.0);

struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out

  static Linear init(Rng& rng, std::size_t in, std::size_t out, double gain = 1.0);
  static Linear zeros(std::size_t in, std::size_t out);
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
  void collect(ParamList& out, const std::string& prefix) const;
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  static LayerNorm init(std::size_t width);
  Tensor operator()(const Tensor& x) const { return layer_norm(x, gain, bias); }
  void collect(ParamList& out, const std::string& prefix) const;
};

struct Attention {
  MhsaParams params;
  std::size_t heads = 1;

  static Attention init(Rng& rng, std::size_t width, std::size_t heads);
  Tensor operator()(const Tensor& x) const { return mhsa(x, params, heads); }
  void collect(ParamList& out, const std::string& prefix) const;
};

// Pre-LN transformer block: x + MHSA(LN(x)), then x + MLP(LN(x)).
struct TransformerBlock {
  LayerNorm ln1;
  Attention attn;
  LayerNorm ln2;
  Linear fc1;
  Linear fc2;

  static TransformerBlock init(Rng& rng, std::size_t width, std::size_t heads, std::size_t ffn_mult);
  Tensor operator()(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

void set_requires_grad(const ParamList& params, bool flag);
void zero_grads(const ParamList& params);
std::size_t count_scalars(const ParamList& params);

}  // namespace aublend::ad
