#include "aublend/model/codebook.hpp"

#include <limits>

#include "aublend/error.hpp"

namespace aublend::model {

using ad::Tensor;

Tensor flatten_bases(const mesh::BasisSet& bases) {
  const std::size_t w = 3 * bases.vertex_count();
  std::vector<double> rows;
  rows.reserve(bases.size() * w);
  for (const auto& d : bases.deltas()) rows.insert(rows.end(), d.deltas.begin(), d.deltas.end());
  return Tensor({bases.size(), w}, std::move(rows));
}

mesh::BasisSet unflatten_bases(const Tensor& rows, const std::vector<mesh::AuId>& ids) {
  if (rows.shape().size() != 2 || rows.rows() != ids.size() || rows.cols() % 3 != 0) {
    throw ShapeError("unflatten_bases: " + ad::to_string(rows.shape()) + " for " + std::to_string(ids.size()) +
                     " AUs");
  }
  const std::size_t w = rows.cols();
  std::vector<mesh::BlendDelta> deltas;
  deltas.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    mesh::BlendDelta d{ids[i], std::vector<float>(w)};
    for (std::size_t j = 0; j < w; ++j) d.deltas[j] = static_cast<float>(rows.values()[i * w + j]);
    deltas.push_back(std::move(d));
  }
  return mesh::BasisSet(std::move(deltas), w / 3);
}

TokenTransformer TokenTransformer::init(Rng& rng, std::size_t tokens, std::size_t in_width, std::size_t latent,
                                        std::size_t out_width, std::size_t layers, std::size_t heads,
                                        std::size_t ffn_mult) {
  TokenTransformer t;
  t.in = ad::Linear::init(rng, in_width, latent);
  std::vector<double> pos(tokens * latent);
  for (auto& v : pos) v = rng.uniform(-0.1, 0.1);
  t.position = Tensor({tokens, latent}, std::move(pos), true);
  for (std::size_t l = 0; l < layers; ++l) t.blocks.push_back(ad::TransformerBlock::init(rng, latent, heads, ffn_mult));
  t.norm = ad::LayerNorm::init(latent);
  t.out = ad::Linear::init(rng, latent, out_width);
  return t;
}

Tensor TokenTransformer::operator()(const Tensor& x) const {
  Tensor h = ad::add(in(x), position);
  for (const auto& b : blocks) h = b(h);
  return out(norm(h));
}

void TokenTransformer::collect(ad::ParamList& out_list, const std::string& prefix) const {
  in.collect(out_list, prefix + ".in");
  out_list.push_back({prefix + ".position", position});
  for (std::size_t l = 0; l < blocks.size(); ++l) blocks[l].collect(out_list, prefix + ".block" + std::to_string(l));
  norm.collect(out_list, prefix + ".norm");
  out.collect(out_list, prefix + ".out");
}

CodebookModel CodebookModel::init(const HyperParams& hp, std::uint64_t seed) {
  validate(hp);
  Rng rng(seed);
  CodebookModel m;
  m.hp = hp;
  m.encoder = TokenTransformer::init(rng, hp.tokens, hp.width, hp.latent, hp.latent, hp.layers, hp.heads, hp.ffn_mult);
  std::vector<double> entries(hp.codebook_size * hp.latent);
  const double bound = 1.0 / static_cast<double>(hp.codebook_size);
  for (auto& v : entries) v = rng.uniform(-bound, bound);
  m.codebook = Tensor({hp.codebook_size, hp.latent}, std::move(entries), true);
  m.decoder = TokenTransformer::init(rng, hp.tokens, hp.latent, hp.latent, hp.width, hp.layers, hp.heads, hp.ffn_mult);
  m.decoder.out = ad::Linear::zeros(hp.latent, hp.width);
  return m;
}

ad::ParamList CodebookModel::params() const {
  ad::ParamList out;
  encoder.collect(out, "encoder");
  out.push_back({"codebook", codebook});
  decoder.collect(out, "decoder");
  return out;
}

Tensor encode(const CodebookModel& m, const Tensor& b) {
  if (b.shape() != ad::Shape{m.hp.tokens, m.hp.width}) {
    throw ShapeError("encode: expected bases of shape " + ad::to_string({m.hp.tokens, m.hp.width}) + ", got " +
                     ad::to_string(b.shape()));
  }
  return ad::scale(m.encoder(ad::scale(b, 1.0 / m.hp.basis_scale)), m.hp.latent_scale);
}

std::vector<std::size_t> nearest_entries(const Tensor& codebook, const Tensor& z) {
  if (!codebook.defined() || codebook.numel() == 0) throw ConfigError("quantize: empty codebook");
  if (codebook.shape().size() != 2 || z.shape().size() != 2 || codebook.cols() != z.cols()) {
    throw ShapeError("quantize: codebook " + ad::to_string(codebook.shape()) + " vs tokens " +
                     ad::to_string(z.shape()));
  }
  const std::size_t d = z.cols();
  const auto cb = codebook.values();
  const auto zv = z.values();
  std::vector<std::size_t> out(z.rows());
  for (std::size_t t = 0; t < z.rows(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < codebook.rows(); ++k) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = zv[t * d + j] - cb[k * d + j];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        best_k = k;
      }
    }
    out[t] = best_k;
  }
  return out;
}

Quantized quantize(const Tensor& codebook, const Tensor& z) {
  auto idx = nearest_entries(codebook, z);
  return {ad::gather_rows(codebook, idx), std::move(idx)};
}

Tensor decode(const CodebookModel& m, const Tensor& zq) {
  if (zq.shape() != ad::Shape{m.hp.tokens, m.hp.latent}) {
    throw ShapeError("decode: expected tokens of shape " + ad::to_string({m.hp.tokens, m.hp.latent}) + ", got " +
                     ad::to_string(zq.shape()));
  }
  return ad::scale(m.decoder(ad::scale(zq, 1.0 / m.hp.latent_scale)), m.hp.output_gain * m.hp.basis_scale);
}

Tensor decode_indices(const CodebookModel& m, const std::vector<std::size_t>& indices) {
  return decode(m, ad::gather_rows(m.codebook, indices));
}

CodebookForward codebook_forward(const CodebookModel& m, const Tensor& b) {
  CodebookForward f;
  f.z = encode(m, b);
  f.q = quantize(m.codebook, f.z);
  f.b_hat = decode(m, ad::straight_through(f.z, f.q.zq));
  return f;
}

mesh::BasisSet reconstruct(const CodebookModel& m, const mesh::BasisSet& bases) {
  ad::NoGradGuard guard;
  const Tensor z = encode(m, flatten_bases(bases));
  return unflatten_bases(decode_indices(m, nearest_entries(m.codebook, z)), bases.ids());
}

}  // namespace aublend::model
