#include "aublend/ad/nn.hpp"

#include <cmath>

namespace aublend::ad {

Tensor uniform_fan_in(Rng& rng, std::size_t fan_in, std::size_t fan_out, double gain) {
  const double bound = gain / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> w(fan_in * fan_out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  return Tensor({fan_in, fan_out}, std::move(w), true);
}

Linear Linear::init(Rng& rng, std::size_t in, std::size_t out, double gain) {
  return {uniform_fan_in(rng, in, out, gain), Tensor::zeros({1, out}, true)};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {Tensor::zeros({in, out}, true), Tensor::zeros({1, out}, true)};
}

void Linear::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm LayerNorm::init(std::size_t width) {
  return {Tensor::full({1, width}, 1.0, true), Tensor::zeros({1, width}, true)};
}

void LayerNorm::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".gain", gain});
  out.push_back({prefix + ".bias", bias});
}

Attention Attention::init(Rng& rng, std::size_t width, std::size_t heads) {
  Attention a;
  a.heads = heads;
  auto q = Linear::init(rng, width, width);
  auto k = Linear::init(rng, width, width);
  auto v = Linear::init(rng, width, width);
  auto o = Linear::init(rng, width, width);
  a.params = {q.weight, q.bias, k.weight, k.bias, v.weight, v.bias, o.weight, o.bias};
  return a;
}

void Attention::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".wq", params.wq});
  out.push_back({prefix + ".bq", params.bq});
  out.push_back({prefix + ".wk", params.wk});
  out.push_back({prefix + ".bk", params.bk});
  out.push_back({prefix + ".wv", params.wv});
  out.push_back({prefix + ".bv", params.bv});
  out.push_back({prefix + ".wo", params.wo});
  out.push_back({prefix + ".bo", params.bo});
}

TransformerBlock TransformerBlock::init(Rng& rng, std::size_t width, std::size_t heads, std::size_t ffn_mult) {
  TransformerBlock b;
  b.ln1 = LayerNorm::init(width);
  b.attn = Attention::init(rng, width, heads);
  b.ln2 = LayerNorm::init(width);
  b.fc1 = Linear::init(rng, width, ffn_mult * width);
  b.fc2 = Linear::init(rng, ffn_mult * width, width);
  return b;
}

Tensor TransformerBlock::operator()(const Tensor& x) const {
  Tensor h = add(x, attn(ln1(x)));
  return add(h, fc2(gelu(fc1(ln2(h)))));
}

void TransformerBlock::collect(ParamList& out, const std::string& prefix) const {
  ln1.collect(out, prefix + ".ln1");
  attn.collect(out, prefix + ".attn");
  ln2.collect(out, prefix + ".ln2");
  fc1.collect(out, prefix + ".fc1");
  fc2.collect(out, prefix + ".fc2");
}

void set_requires_grad(const ParamList& params, bool flag) {
  for (const auto& p : params) {
    auto t = p.tensor;
    t.set_requires_grad(flag);
  }
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) {
    auto t = p.tensor;
    t.zero_grad();
  }
}

std::size_t count_scalars(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

}  // namespace aublend::ad
