#pragma once

#include <vector>

#include "aublend/ad/nn.hpp"
#include "aublend/mesh/mesh.hpp"
#include "aublend/model/hyper.hpp"
#include "aublend/rng.hpp"

namespace aublend::model {

// Bases as an N x W tensor (one row per AU, mesh-core flattening).
ad::Tensor flatten_bases(const mesh::BasisSet& bases);
mesh::BasisSet unflatten_bases(const ad::Tensor& rows, const std::vector<mesh::AuId>& ids);

// Transformer over the N AU tokens: W -> D on the way in, D -> W on the way out.
struct TokenTransformer {
  ad::Linear in;
  ad::Tensor position;  // N x D
  std::vector<ad::TransformerBlock> blocks;
  ad::LayerNorm norm;
  ad::Linear out;

  static TokenTransformer init(Rng& rng, std::size_t tokens, std::size_t in_width, std::size_t latent,
                               std::size_t out_width, std::size_t layers, std::size_t heads, std::size_t ffn_mult);
  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(ad::ParamList& out, const std::string& prefix) const;
};

struct CodebookModel {
  HyperParams hp;
  TokenTransformer encoder;
  ad::Tensor codebook;  // P x D
  TokenTransformer decoder;

  static CodebookModel init(const HyperParams& hp, std::uint64_t seed);

  ad::ParamList params() const;  // "encoder.*", "codebook", "decoder.*"
};

struct Quantized {
  ad::Tensor zq;  // rows of the codebook, connected to it in the graph
  std::vector<std::size_t> indices;
};

// Z = E(B). ShapeError if B is not N x W.
ad::Tensor encode(const CodebookModel& m, const ad::Tensor& b);

// Nearest entry per row by squared Euclidean distance; ties go to the
// lowest index. ConfigError on an empty codebook.
std::vector<std::size_t> nearest_entries(const ad::Tensor& codebook, const ad::Tensor& z);
Quantized quantize(const ad::Tensor& codebook, const ad::Tensor& z);

// B_hat = D(Zq). ShapeError if zq is not N x D.
ad::Tensor decode(const CodebookModel& m, const ad::Tensor& zq);
// Decodes the codebook rows at `indices`.
ad::Tensor decode_indices(const CodebookModel& m, const std::vector<std::size_t>& indices);

struct CodebookForward {
  ad::Tensor z;
  Quantized q;
  ad::Tensor b_hat;
};

// Training-graph pass: Z = E(B), Zq = quantize(Z), B_hat = D(straight_through(Z, Zq)).
CodebookForward codebook_forward(const CodebookModel& m, const ad::Tensor& b);

// Deterministic reconstruction D(quantize(E(B))) with no graph.
mesh::BasisSet reconstruct(const CodebookModel& m, const mesh::BasisSet& bases);

}  // namespace aublend::model
