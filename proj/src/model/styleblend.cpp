#include "aublend/model/styleblend.hpp"

#include "aublend/error.hpp"

namespace aublend::model {

using ad::Tensor;

Tensor Tcn::operator()(const Tensor& m) const {
  Tensor h = ad::add(ad::tile_rows(m, position.rows()), position);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& c = layers[l];
    Tensor y = ad::gelu(ad::dilated_conv1d(h, c.weight, c.bias, kernel, c.dilation));
    h = l == 0 ? y : ad::add(h, y);
  }
  return h;
}

void Tcn::collect(ad::ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".position", position});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out.push_back({prefix + ".conv" + std::to_string(l) + ".weight", layers[l].weight});
    out.push_back({prefix + ".conv" + std::to_string(l) + ".bias", layers[l].bias});
  }
}

AdaLNBlock AdaLNBlock::init(Rng& rng, std::size_t d, std::size_t heads, std::size_t ffn_mult) {
  AdaLNBlock b;
  b.modulation = ad::Linear::init(rng, d, 6 * d);
  auto w = b.modulation.weight.data();
  auto bias = b.modulation.bias.data();
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      w[r * 6 * d + 2 * d + c] = 0.0;  // alpha1
      w[r * 6 * d + 5 * d + c] = 0.0;  // alpha2
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    bias[c] = 1.0;          // gamma1
    bias[3 * d + c] = 1.0;  // gamma2
  }
  b.attn = ad::Attention::init(rng, d, heads);
  b.fc1 = ad::Linear::init(rng, d, ffn_mult * d);
  b.fc2 = ad::Linear::init(rng, ffn_mult * d, d);
  return b;
}

Modulation AdaLNBlock::modulate(const Tensor& style) const {
  const Tensor p = modulation(ad::gelu(style));
  const std::size_t d = p.cols() / 6;
  auto part = [&](std::size_t i) { return ad::slice(p, 1, i * d, (i + 1) * d); };
  return {part(0), part(1), part(2), part(3), part(4), part(5)};
}

Tensor AdaLNBlock::operator()(const Tensor& x, const Tensor& style) const {
  const Modulation m = modulate(style);
  Tensor h = ad::add(ad::mul(ad::layer_norm(x), m.gamma1), m.beta1);
  Tensor x1 = ad::add(x, ad::mul(attn(h), m.alpha1));
  Tensor g = ad::add(ad::mul(ad::layer_norm(x1), m.gamma2), m.beta2);
  return ad::add(x1, ad::mul(fc2(ad::gelu(fc1(g))), m.alpha2));
}

void AdaLNBlock::collect(ad::ParamList& out, const std::string& prefix) const {
  modulation.collect(out, prefix + ".modulation");
  attn.collect(out, prefix + ".attn");
  fc1.collect(out, prefix + ".fc1");
  fc2.collect(out, prefix + ".fc2");
}

StyleBlendModel StyleBlendModel::init(const HyperParams& hp, std::uint64_t seed, std::vector<double> template_mean) {
  validate(hp);
  if (template_mean.empty()) template_mean.assign(hp.width, 0.0);
  if (template_mean.size() != hp.width) {
    throw ShapeError("template mean has " + std::to_string(template_mean.size()) + " values, expected " +
                     std::to_string(hp.width));
  }
  Rng rng(seed);
  StyleBlendModel s;
  s.hp = hp;
  s.template_mean = Tensor({1, hp.width}, std::move(template_mean));
  const std::size_t d = hp.latent;
  const std::size_t c = hp.channels();
  std::vector<double> pos(hp.tokens * hp.width);
  for (auto& v : pos) v = rng.uniform(-0.1, 0.1);
  s.tcn.position = Tensor({hp.tokens, hp.width}, std::move(pos), true);
  s.tcn.kernel = hp.tcn_kernel;
  for (std::size_t l = 0; l < hp.tcn_dilations.size(); ++l) {
    const std::size_t cin = l == 0 ? hp.width : c;
    s.tcn.layers.push_back({ad::uniform_fan_in(rng, hp.tcn_kernel * cin, c), Tensor::zeros({1, c}, true),
                            hp.tcn_dilations[l]});
  }
  s.proj1 = ad::Linear::init(rng, c, d);
  s.proj2 = ad::Linear::init(rng, d, d);
  s.anchor = Tensor::zeros({hp.tokens, d}, true);
  s.style1 = ad::Linear::init(rng, hp.width, d);
  s.style2 = ad::Linear::init(rng, d, d);
  for (std::size_t l = 0; l < hp.layers; ++l) s.blocks.push_back(AdaLNBlock::init(rng, d, hp.heads, hp.ffn_mult));
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  s.head = {Tensor({d, d}, std::move(eye), true), Tensor::zeros({1, d}, true)};
  return s;
}

ad::ParamList StyleBlendModel::params() const {
  ad::ParamList out;
  tcn.collect(out, "tcn");
  proj1.collect(out, "proj1");
  proj2.collect(out, "proj2");
  out.push_back({"anchor", anchor});
  style1.collect(out, "style1");
  style2.collect(out, "style2");
  for (std::size_t l = 0; l < blocks.size(); ++l) blocks[l].collect(out, "block" + std::to_string(l));
  head.collect(out, "head");
  return out;
}

ad::ParamList StyleBlendModel::buffers() const { return {{"template_mean", template_mean}}; }

Tensor template_input(const StyleBlendModel& s, const mesh::FaceMesh& templ) {
  if (3 * templ.vertex_count() != s.hp.width) {
    throw ShapeError("template has " + std::to_string(templ.vertex_count()) + " vertices, model expects " +
                     std::to_string(s.hp.vertex_count()));
  }
  const auto pos = templ.positions();
  const auto mean = s.template_mean.values();
  std::vector<double> row(pos.size());
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = (static_cast<double>(pos[i]) - mean[i]) / s.hp.template_scale;
  const std::size_t w = row.size();
  return Tensor({1, w}, std::move(row));
}

StyleTokens styleblend_forward(const StyleBlendModel& s, const mesh::FaceMesh& templ) {
  const Tensor m = template_input(s, templ);
  StyleTokens out;
  out.projected = ad::add(ad::scale(s.proj2(ad::gelu(s.proj1(s.tcn(m)))), s.hp.latent_scale), s.anchor);
  out.style = s.style2(ad::gelu(s.style1(m)));
  Tensor x = out.projected;
  for (const auto& b : s.blocks) x = b(x, out.style);
  out.tokens = s.head(x);
  return out;
}

Tensor styleblend_tokens(const StyleBlendModel& s, const mesh::FaceMesh& templ) {
  return styleblend_forward(s, templ).tokens;
}

Prediction predict_basis(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                         const std::vector<mesh::AuId>& ids) {
  if (s.hp.width != c.hp.width || s.hp.latent != c.hp.latent || s.hp.tokens != c.hp.tokens) {
    throw ShapeError("styleblend and codebook models disagree on shapes");
  }
  ad::NoGradGuard guard;
  Prediction p;
  p.indices = nearest_entries(c.codebook, styleblend_tokens(s, templ));
  p.bases = unflatten_bases(decode_indices(c, p.indices), ids);
  return p;
}

}  // namespace aublend::model
