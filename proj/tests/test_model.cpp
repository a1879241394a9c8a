#include <cmath>
#include <cstring>

#include "aublend/ad/ops.hpp"
#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/model/checkpoint.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/losses.hpp"
#include "aublend/model/styleblend.hpp"
#include "aublend/synth/generator.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "model_fixtures.hpp"

using namespace aublend;
using namespace aublend::model;
using ad::Tensor;

TEST_SUITE_BEGIN("model");

namespace {

// Five-point stencil step for the objective checks.
constexpr double kStep = 3e-3;
constexpr double kFloor = 1e-8;

std::vector<double> values(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

mesh::FaceMesh tiny_template(std::uint64_t seed) {
  Rng rng(seed);
  return synth::generate_template(synth::sample_style(rng), synth::FaceLayout(75));
}

}  // namespace

TEST_CASE("hyperparameter validation and JSON round trip") {
  auto hp = model_fixtures::tiny_hp();
  CHECK_NOTHROW(validate(hp));
  CHECK(hyper_from_json(to_json(hp)) == hp);
  auto bad = hp;
  bad.heads = 3;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = hp;
  bad.codebook_size = 1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = hp;
  bad.tcn_dilations = {1, 8, 16};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(hyper_from_json("{"), FormatError);
}

TEST_CASE("flatten and unflatten bases") {
  Rng rng(1);
  const auto b = fixtures::random_bases(rng, 75);
  const auto t = flatten_bases(b);
  CHECK(t.shape() == ad::Shape{32, 225});
  CHECK(t.values()[225 + 4] == static_cast<double>(b.deltas()[1].deltas[4]));
  CHECK(unflatten_bases(t, b.ids()) == b);
}

TEST_CASE("nearest entries match an exhaustive scan and break ties low") {
  Rng rng(2);
  std::vector<double> cb(16 * 5), z(200 * 5);
  for (auto& v : cb) v = rng.uniform(-1.0, 1.0);
  for (auto& v : z) v = rng.uniform(-1.0, 1.0);
  const Tensor book({16, 5}, cb), tokens({200, 5}, z);
  const auto idx = nearest_entries(book, tokens);
  for (std::size_t r = 0; r < 200; ++r) {
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < 16; ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < 5; ++j) d += (z[r * 5 + j] - cb[k * 5 + j]) * (z[r * 5 + j] - cb[k * 5 + j]);
      if (d < best) best = d, arg = k;
    }
    CHECK(idx[r] == arg);
  }
  const Tensor dup({3, 2}, {1, 1, 0, 0, 0, 0});
  CHECK(nearest_entries(dup, Tensor({1, 2}, {0.1, 0.1}))[0] == 1);
}

TEST_CASE("straight-through passes the quantised-token gradient to the encoder tokens") {
  Rng rng(3);
  std::vector<double> zv(6 * 4), cv(5 * 4), wv(6 * 4);
  for (auto& v : zv) v = rng.uniform(-1.0, 1.0);
  for (auto& v : cv) v = rng.uniform(-1.0, 1.0);
  for (auto& v : wv) v = rng.uniform(-1.0, 1.0);
  Tensor z({6, 4}, zv, true);
  Tensor book({5, 4}, cv, true);
  const Tensor w({6, 4}, wv);
  const auto q = quantize(book, z);
  Tensor st = ad::straight_through(z, q.zq);
  CHECK(values(st) == values(q.zq));

  // Downstream gradient at the quantised tokens: d/dst sum(st^2 * w) = 2 st w.
  ad::sum(ad::mul(ad::square(st), w)).backward();
  const auto gz = z.grad();
  for (std::size_t i = 0; i < gz.size(); ++i) CHECK(gz[i] == 2.0 * st.values()[i] * wv[i]);
  for (double g : book.grad()) CHECK(g == 0.0);
}

TEST_CASE("codebook model shapes and zero-initialised decoder head") {
  const auto hp = model_fixtures::tiny_hp();
  const auto m = CodebookModel::init(hp, 4);
  Rng rng(4);
  const Tensor b = model_fixtures::random_bases_tensor(rng, hp);
  const auto f = codebook_forward(m, b);
  CHECK(f.z.shape() == ad::Shape{32, 8});
  CHECK(f.b_hat.shape() == ad::Shape{32, 225});
  for (double v : f.b_hat.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(encode(m, Tensor::zeros({31, 225})), ShapeError);
  CHECK_THROWS_AS(decode(m, Tensor::zeros({32, 7})), ShapeError);
}

TEST_CASE("codebook objective gradient matches finite differences of the held-fixed surrogate") {
  const auto hp = model_fixtures::tiny_hp();
  auto m = CodebookModel::init(hp, 5);
  model_fixtures::randomize(m.params(), 50);
  Rng rng(5);
  const Tensor b = model_fixtures::random_bases_tensor(rng, hp);
  std::vector<std::size_t> idx;
  {
    ad::NoGradGuard g;
    idx = nearest_entries(m.codebook, encode(m, b));
  }
  const model_fixtures::CodebookSurrogate surrogate(m, b, idx);
  {
    ad::NoGradGuard g;
    CHECK(codebook_objective_at(m, b, idx).item() == doctest::Approx(surrogate().item()).epsilon(1e-14));
  }
  const auto r = gradcheck::check_against([&] { return codebook_objective_at(m, b, idx); }, surrogate, m.params(),
                                          kStep, kFloor, true);
  INFO(r.worst);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("AdaLN-Zero block is the identity at init") {
  auto hp = model_fixtures::tiny_hp();
  const auto s = StyleBlendModel::init(hp, 6);
  Rng rng(6);
  std::vector<double> xv(32 * 8), sv(8);
  for (auto& v : xv) v = rng.uniform(-2.0, 2.0);
  for (auto& v : sv) v = rng.uniform(-2.0, 2.0);
  const Tensor x({32, 8}, xv), style({1, 8}, sv);
  CHECK(values(s.blocks[0](x, style)) == xv);
  const auto fwd = styleblend_forward(s, tiny_template(6));
  CHECK(values(fwd.tokens) == values(fwd.projected));
}

TEST_CASE("styleblend objective gradient matches finite differences of the held-fixed surrogate") {
  const auto hp = model_fixtures::tiny_hp();
  auto c = CodebookModel::init(hp, 7);
  model_fixtures::randomize(c.params(), 70);
  ad::set_requires_grad(c.params(), false);
  auto s = StyleBlendModel::init(hp, 8);
  model_fixtures::randomize(s.params(), 80, 0.2);
  const auto templ = tiny_template(8);
  Rng rng(8);
  const Tensor b = model_fixtures::random_bases_tensor(rng, hp);
  std::vector<std::size_t> target, pred;
  {
    ad::NoGradGuard g;
    target = nearest_entries(c.codebook, encode(c, b));
    pred = nearest_entries(c.codebook, styleblend_tokens(s, templ));
  }
  const model_fixtures::StyleBlendSurrogate surrogate(s, c, templ, b, target, pred);
  const auto r = gradcheck::check_against([&] { return styleblend_objective_at(s, c, templ, b, target, pred); },
                                          surrogate, s.params(), kStep, kFloor, true);
  INFO(r.worst);
  CHECK(r.max_rel_error < 1e-4);
  for (const auto& p : c.params()) CHECK(p.tensor.grad().empty());
}

TEST_CASE("predict_basis decodes the nearest entries of the predicted tokens") {
  const auto hp = model_fixtures::tiny_hp();
  auto c = CodebookModel::init(hp, 9);
  model_fixtures::randomize(c.params(), 90);
  const auto s = StyleBlendModel::init(hp, 10);
  const auto templ = tiny_template(10);
  const auto ids = facs::Registry::builtin().ids();
  const auto p = predict_basis(s, c, templ, ids);
  CHECK(p.indices.size() == 32);
  CHECK(p.bases.ids() == ids);
  ad::NoGradGuard g;
  CHECK(p.indices == nearest_entries(c.codebook, styleblend_tokens(s, templ)));
  CHECK(p.bases == unflatten_bases(decode_indices(c, p.indices), ids));
  CHECK(predict_basis(s, c, templ, ids).bases == p.bases);
}

TEST_CASE("checkpoints round trip and reject mismatches") {
  const auto hp = model_fixtures::tiny_hp();
  auto c = CodebookModel::init(hp, 11);
  model_fixtures::randomize(c.params(), 110);
  std::vector<double> mean(hp.width, 0.25);
  const auto s = StyleBlendModel::init(hp, 12, mean);
  fixtures::TempDir dir("ckpt");
  save_codebook(c, dir / "c.aubm");
  const auto c2 = load_codebook(dir / "c.aubm");
  CHECK(c2.hp == c.hp);
  const auto p1 = c.params(), p2 = c2.params();
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].name == p2[i].name);
    for (std::size_t k = 0; k < p1[i].tensor.numel(); ++k) {
      REQUIRE(p2[i].tensor.values()[k] == static_cast<double>(static_cast<float>(p1[i].tensor.values()[k])));
    }
  }
  save_models({c, s}, dir / "m.aubm");
  const auto pair = load_models(dir / "m.aubm");
  CHECK(values(pair.style.template_mean) == mean);
  const auto templ = tiny_template(12);
  const auto ids = facs::Registry::builtin().ids();
  // Saving twice yields identical bytes.
  save_models(pair, dir / "m2.aubm");
  save_models(load_models(dir / "m2.aubm"), dir / "m3.aubm");
  CHECK(io::read_file(dir / "m2.aubm") == io::read_file(dir / "m3.aubm"));
  CHECK(predict_basis(pair.style, pair.codebook, templ, ids).bases ==
        predict_basis(load_models(dir / "m2.aubm").style, pair.codebook, templ, ids).bases);

  CHECK_THROWS_AS(load_models(dir / "c.aubm"), FormatError);
  auto bytes = io::read_file(dir / "c.aubm");
  bytes[bytes.size() / 2] ^= 1;
  CHECK_THROWS_AS(decode_checkpoint(bytes), FormatError);

  Checkpoint ck;
  ck.kind = "codebook";
  ck.hp = hp;
  ck.tensors = c.params();
  ck.tensors.pop_back();
  CHECK_THROWS_WITH_AS(codebook_from(decode_checkpoint(encode_checkpoint(ck))), doctest::Contains("missing"),
                       FormatError);
}

TEST_SUITE_END();
