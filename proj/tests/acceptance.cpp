// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "aublend/binary_io.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/losses.hpp"
#include "aublend/model/styleblend.hpp"
#include "aublend/synth/dataset.hpp"
#include "aublend/synth/generator.hpp"
#include "aublend/train/evaluate.hpp"
#include "aublend/train/metrics.hpp"
#include "aublend/train/trainer.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "model_fixtures.hpp"

using namespace aublend;
using ad::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Tensor random_tensor(Rng& rng, ad::Shape shape, bool grad = true) {
  std::vector<double> v(ad::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v), grad);
}

// ---------------------------------------------------------------- 1

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  using namespace ad;
  Rng rng(1);
  Tensor a = random_tensor(rng, {4, 6}), b = random_tensor(rng, {4, 6});
  Tensor row = random_tensor(rng, {1, 6}), col = random_tensor(rng, {4, 1});
  Tensor probe = random_tensor(rng, {4, 6}, false);
  Tensor w = random_tensor(rng, {6, 3}), bias = random_tensor(rng, {1, 3});
  Tensor conv_w = random_tensor(rng, {18, 3});
  Tensor p3 = random_tensor(rng, {4, 3}, false), p6x4 = random_tensor(rng, {6, 4}, false);
  Tensor p8 = random_tensor(rng, {8, 6}, false), p24 = random_tensor(rng, {3, 8}, false);
  Tensor p2 = random_tensor(rng, {2, 6}, false), p5 = random_tensor(rng, {5, 6}, false);
  MhsaParams m{random_tensor(rng, {6, 6}), random_tensor(rng, {1, 6}), random_tensor(rng, {6, 6}),
               random_tensor(rng, {1, 6}), random_tensor(rng, {6, 6}), random_tensor(rng, {1, 6}),
               random_tensor(rng, {6, 6}), random_tensor(rng, {1, 6})};
  auto weighted = [&](const Tensor& t) { return sum(mul(t, probe)); };
  struct Case {
    const char* name;
    std::function<Tensor()> loss;
    ParamList params;
  };
  const std::vector<Case> cases = {
      {"add", [&] { return weighted(add(a, b)); }, {{"a", a}, {"b", b}}},
      {"add_row", [&] { return weighted(add(a, row)); }, {{"a", a}, {"row", row}}},
      {"sub_col", [&] { return weighted(sub(a, col)); }, {{"a", a}, {"col", col}}},
      {"mul", [&] { return weighted(mul(a, b)); }, {{"a", a}, {"b", b}}},
      {"scale", [&] { return weighted(scale(a, 0.7)); }, {{"a", a}}},
      {"square", [&] { return weighted(square(a)); }, {{"a", a}}},
      {"abs", [&] { return weighted(abs(a)); }, {{"a", a}}},
      {"gelu", [&] { return weighted(gelu(a)); }, {{"a", a}}},
      {"matmul", [&] { return sum(mul(matmul(a, w), p3)); }, {{"a", a}, {"w", w}}},
      {"transpose", [&] { return sum(mul(transpose(a), p6x4)); }, {{"a", a}}},
      {"reshape", [&] { return sum(mul(reshape(a, {3, 8}), p24)); }, {{"a", a}}},
      {"concat", [&] { return sum(mul(concat({a, b}, 0), p8)); }, {{"a", a}, {"b", b}}},
      {"slice", [&] { return sum(mul(slice(a, 0, 1, 3), p2)); }, {{"a", a}}},
      {"tile_rows", [&] { return sum(mul(tile_rows(row, 5), p5)); }, {{"row", row}}},
      {"mean", [&] { return mean(mul(a, b)); }, {{"a", a}, {"b", b}}},
      {"layer_norm", [&] { return weighted(layer_norm(a)); }, {{"a", a}}},
      {"softmax", [&] { return weighted(softmax(a)); }, {{"a", a}}},
      {"gather_rows", [&] { return sum(mul(gather_rows(a, {3, 0}), p2)); }, {{"a", a}}},
      {"linear", [&] { return sum(mul(linear(a, w, bias), p3)); }, {{"a", a}, {"w", w}, {"bias", bias}}},
      {"dilated_conv1d", [&] { return sum(mul(dilated_conv1d(a, conv_w, bias, 3, 1), p3)); },
       {{"a", a}, {"w", conv_w}, {"bias", bias}}},
      {"mhsa", [&] { return weighted(mhsa(a, m, 2)); },
       {{"a", a}, {"wq", m.wq}, {"wk", m.wk}, {"wv", m.wv}, {"wo", m.wo}, {"bo", m.bo}}},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    const auto r = gradcheck::check(c.loss, c.params);
    if (r.max_rel_error > worst) worst = r.max_rel_error, worst_name = std::string(c.name) + " " + r.worst;
  }

  // Full objectives on the tiny configuration, indices held fixed.
  const auto hp = model_fixtures::tiny_hp();
  auto cb = model::CodebookModel::init(hp, 5);
  model_fixtures::randomize(cb.params(), 50);
  Rng brng(5);
  const Tensor bases = model_fixtures::random_bases_tensor(brng, hp);
  std::vector<std::size_t> idx;
  {
    NoGradGuard g;
    idx = model::nearest_entries(cb.codebook, model::encode(cb, bases));
  }
  const auto rc = gradcheck::check_against([&] { return model::codebook_objective_at(cb, bases, idx); },
                                           model_fixtures::CodebookSurrogate(cb, bases, idx), cb.params(),
                                           3e-3, 1e-8, true);

  set_requires_grad(cb.params(), false);
  auto sb = model::StyleBlendModel::init(hp, 8);
  model_fixtures::randomize(sb.params(), 80, 0.2);
  Rng trng(8);
  const auto templ = synth::generate_template(synth::sample_style(trng), synth::FaceLayout(75));
  std::vector<std::size_t> target, pred;
  {
    NoGradGuard g;
    target = model::nearest_entries(cb.codebook, model::encode(cb, bases));
    pred = model::nearest_entries(cb.codebook, model::styleblend_tokens(sb, templ));
  }
  const auto rs = gradcheck::check_against(
      [&] { return model::styleblend_objective_at(sb, cb, templ, bases, target, pred); },
      model_fixtures::StyleBlendSurrogate(sb, cb, templ, bases, target, pred), sb.params(), 3e-3, 1e-8,
      true);

  const double secs = seconds_since(t0);
  const bool pass = worst < 1e-4 && rc.max_rel_error < 1e-4 && rs.max_rel_error < 1e-4 && secs < 120.0;
  return {pass, fmt("ops max rel %.2e (%s); codebook loss %.2e over %zu; styleblend loss %.2e over %zu; %.1f s",
                    worst, worst_name.empty() ? "-" : worst_name.c_str(), rc.max_rel_error, rc.checked,
                    rs.max_rel_error, rs.checked, secs)};
}

// ---------------------------------------------------------------- 2

std::int64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, 8);
  std::memcpy(&ib, &b, 8);
  if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
  if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
  return ia > ib ? ia - ib : ib - ia;
}

model::HyperParams desk_hp(std::size_t vertices) {
  model::HyperParams hp;
  hp.width = 3 * vertices;
  hp.latent = 32;
  hp.codebook_size = 64;
  return hp;
}

Outcome adaln_identity() {
  std::int64_t worst = 0;
  std::size_t elements = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = model::StyleBlendModel::init(desk_hp(529), seed);
    Rng rng(100 + seed);
    const Tensor x = random_tensor(rng, {32, 32}, false);
    const Tensor style = random_tensor(rng, {1, 32}, false);
    for (const auto& block : s.blocks) {
      const Tensor y = block(x, style);
      for (std::size_t i = 0; i < x.numel(); ++i) worst = std::max(worst, ulp_distance(x.values()[i], y.values()[i]));
      elements += x.numel();
    }
  }
  return {worst <= 1, fmt("max %lld ulp over %zu elements (5 inits, every block)", static_cast<long long>(worst),
                          elements)};
}

// ---------------------------------------------------------------- 3

Outcome straight_through_quantizer() {
  Rng rng(3);
  const std::size_t n = 1000, d = 32, p = 64;
  Tensor z = random_tensor(rng, {n, d});
  Tensor book = random_tensor(rng, {p, d});
  const auto q = model::quantize(book, z);
  std::size_t agree = 0;
  for (std::size_t r = 0; r < n; ++r) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < p; ++k) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = z.values()[r * d + j] - book.values()[k * d + j];
        dist += diff * diff;
      }
      if (dist < best) best = dist, arg = k;
    }
    agree += q.indices[r] == arg;
  }

  // Gradient arriving at the quantised tokens vs the gradient at z.
  Tensor st = ad::straight_through(z, q.zq);
  const Tensor probe = random_tensor(rng, {n, d}, false);
  // Loss sum(st^2 * probe): the upstream gradient at st is 2 * st * probe.
  ad::sum(ad::mul(ad::square(st), probe)).backward();
  std::size_t equal = 0;
  for (std::size_t i = 0; i < n * d; ++i) equal += z.grad()[i] == 2.0 * st.values()[i] * probe.values()[i];
  bool book_clean = true;
  for (double g : book.grad()) book_clean &= g == 0.0;
  return {agree == n && equal == n * d && book_clean,
          fmt("index agreement %zu/%zu; gradient equal %zu/%zu elements", agree, n, equal, n * d)};
}

// ---------------------------------------------------------------- 4 and 5

struct Desk {
  synth::Dataset ds;
  train::BundleList train, heldout;
  double variance = 0.0;
  std::optional<model::CodebookModel> codebook;
  double codebook_seconds = 0.0;
};

Desk& desk() {
  static Desk d = [] {
    Desk x;
    synth::DatasetOptions opts;
    opts.interpolate_heldout = true;
    x.ds = synth::generate_dataset(10, 7, 529, opts);
    x.train = x.ds.select(x.ds.split.train);
    x.heldout = x.ds.select(x.ds.split.val);
    for (auto* b : x.ds.select(x.ds.split.test)) x.heldout.push_back(b);
    std::vector<const mesh::BasisSet*> sets;
    for (auto* b : x.train) sets.push_back(&b->bases);
    x.variance = mesh::delta_variance(sets);
    return x;
  }();
  return d;
}

train::TrainConfig desk_config(train::Stage stage) {
  auto cfg = train::TrainConfig::defaults(stage);
  cfg.hp.latent = 32;
  cfg.hp.codebook_size = 64;
  return cfg;
}

const model::CodebookModel& desk_codebook() {
  auto& d = desk();
  if (!d.codebook) {
    const auto t0 = Clock::now();
    // Model selection uses the training identities; the held-out pair stays unseen.
    d.codebook = train::train_codebook(desk_config(train::Stage::codebook), d.train, {}).model;
    d.codebook_seconds = seconds_since(t0);
  }
  return *d.codebook;
}

Outcome codebook_overfit() {
  const auto& cb = desk_codebook();
  const auto& d = desk();
  double mse = 0.0;
  for (const auto* b : d.train) mse += mesh::basis_mse(model::reconstruct(cb, b->bases), b->bases);
  mse /= static_cast<double>(d.train.size());
  const double ratio = mse / d.variance;
  return {ratio < 0.05 && d.codebook_seconds < 600.0,
          fmt("reconstruction basis_mse %.4g = %.4f of delta variance (need < 0.05); 200 epochs in %.0f s", mse,
              ratio, d.codebook_seconds)};
}

Outcome styleblend_signal() {
  const auto& cb = desk_codebook();
  const auto& d = desk();
  const auto t0 = Clock::now();
  const auto result = train::train_styleblend(desk_config(train::Stage::styleblend), d.train, {}, cb);
  const double secs = seconds_since(t0);
  const auto ids = d.train.front()->bases.ids();
  double train_mse = 0.0;
  for (const auto* b : d.train) {
    train_mse += mesh::basis_mse(model::predict_basis(result.model, cb, b->templ, ids).bases, b->bases);
  }
  train_mse /= static_cast<double>(d.train.size());
  const auto baseline = train::mean_basis(d.train);
  double held = 0.0, base = 0.0;
  for (const auto* b : d.heldout) {
    held += mesh::basis_mse(model::predict_basis(result.model, cb, b->templ, ids).bases, b->bases);
    base += mesh::basis_mse(baseline, b->bases);
  }
  held /= static_cast<double>(d.heldout.size());
  base /= static_cast<double>(d.heldout.size());
  const double ratio = train_mse / d.variance;
  const bool a = ratio < 0.10, b = held < base;
  return {a && b && secs < 1800.0,
          fmt("(a) train basis_mse %.4f of delta variance (need < 0.10) %s; (b) held-out %.4g vs mean-basis %.4g "
              "%s; 400 epochs in %.0f s",
              ratio, a ? "ok" : "MISSED", held, base, b ? "ok" : "MISSED", secs)};
}

// ---------------------------------------------------------------- 6

std::vector<float> brute_compose(const mesh::FaceMesh& t, const mesh::BasisSet& b, const mesh::Activation& a) {
  std::vector<float> out(t.positions().size());
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      float acc = t.positions()[3 * v + c];
      for (const auto& [id, w] : a.weights()) {
        if (w != 0.0f) acc += w * b.at(id).deltas[3 * v + c];
      }
      out[3 * v + c] = acc;
    }
  }
  return out;
}

double float_ulp(double mag) {
  return std::nextafter(static_cast<float>(mag), std::numeric_limits<float>::infinity()) - static_cast<float>(mag);
}

Outcome composition_exactness() {
  Rng rng(6);
  const auto ids = facs::Registry::builtin().ids();
  std::size_t exact = 0;
  double worst_add = 0.0, worst_scale = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t v = 64 + rng.below(400);
    const auto t = fixtures::random_mesh(rng, v);
    const auto b = fixtures::random_bases(rng, v, 0.2);
    const std::size_t k = 1 + rng.below(32);
    const auto a = fixtures::random_activation(rng, k);
    const auto out = mesh::compose(t, b, a);
    exact += std::vector<float>(out.positions().begin(), out.positions().end()) == brute_compose(t, b, a);

    // Additivity: compose(a) + compose(c) - T against compose(a + c), with
    // a and c at most 0.5 per AU; scaling: compose(l * a) - T against
    // l * (compose(a) - T). Error measured in float ulps of the largest
    // magnitude involved, per accumulated term.
    mesh::Activation x, y, sum;
    for (std::size_t i = 0; i < k; ++i) {
      const auto id = ids[rng.below(ids.size())];
      const float wx = static_cast<float>(rng.uniform(0.0, 0.5));
      const float wy = static_cast<float>(rng.uniform(0.0, 0.5));
      x.set(id, wx);
      y.set(id, wy);
      sum.set(id, wx + wy);
    }
    const std::size_t terms = sum.weights().size();
    const auto px = mesh::compose(t, b, x), py = mesh::compose(t, b, y), ps = mesh::compose(t, b, sum);
    const float lambda = static_cast<float>(rng.uniform(0.0, 1.0));
    const auto pl = mesh::compose(t, b, x.scaled(lambda));
    for (std::size_t i = 0; i < 3 * v; ++i) {
      const double base = t.positions()[i];
      const double mag = std::max({std::fabs(base), std::fabs(static_cast<double>(ps.positions()[i])),
                                   std::fabs(static_cast<double>(px.positions()[i])),
                                   std::fabs(static_cast<double>(py.positions()[i]))});
      const double unit = float_ulp(mag) * static_cast<double>(terms + 1);
      const double lhs = static_cast<double>(px.positions()[i]) + py.positions()[i] - base;
      worst_add = std::max(worst_add, std::fabs(lhs - ps.positions()[i]) / unit);
      const double off = static_cast<double>(pl.positions()[i]) - base;
      const double want = static_cast<double>(lambda) * (static_cast<double>(px.positions()[i]) - base);
      worst_scale = std::max(worst_scale, std::fabs(off - want) / unit);
    }
  }
  return {exact == 100 && worst_add <= 4.0 && worst_scale <= 4.0,
          fmt("bit-exact %d/100; additivity %.2f ulp/term, scaling %.2f ulp/term (limit 4)", static_cast<int>(exact),
              worst_add, worst_scale)};
}

// ---------------------------------------------------------------- 7

Outcome blend_latency() {
  Rng rng(7);
  const auto t = fixtures::random_mesh(rng, 5023);
  const auto b = fixtures::random_bases(rng, 5023, 0.01);
  mesh::Activation a;
  for (auto id : b.ids()) a.set(id, static_cast<float>(rng.uniform(0.05, 1.0)));
  std::vector<double> ms;
  double sink = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto t0 = Clock::now();
    const auto out = mesh::compose(t, b, a);
    ms.push_back(seconds_since(t0) * 1000.0);
    sink += out.positions()[static_cast<std::size_t>(i) % out.positions().size()];
  }
  std::sort(ms.begin(), ms.end());
  const double median = 0.5 * (ms[499] + ms[500]);
  return {median < 2.0 && std::isfinite(sink),
          fmt("32-AU compose on V=5023: median %.3f ms, p95 %.3f ms over 1000 runs", median, ms[949])};
}

// ---------------------------------------------------------------- 8

Outcome split_arithmetic() {
  synth::DatasetOptions opts;
  opts.pose_count = 1;
  const auto small = synth::generate_dataset(10, 8, 64, opts);
  const auto large = synth::generate_dataset(500, 8, 64, opts);
  auto sizes = [](const synth::Dataset& d) {
    return fmt("%zu/%zu/%zu", d.split.train.size(), d.split.val.size(), d.split.test.size());
  };
  std::set<std::string> all;
  for (const auto* s : {&large.split.train, &large.split.val, &large.split.test}) all.insert(s->begin(), s->end());
  const bool pass = sizes(small) == "8/1/1" && sizes(large) == "400/50/50" && all.size() == 500;
  return {pass, "10 -> " + sizes(small) + ", 500 -> " + sizes(large) + fmt(", %zu distinct ids", all.size())};
}

// ---------------------------------------------------------------- 9

Outcome metric_oracles() {
  using mesh::FaceMesh;
  const train::Sequence pred{FaceMesh({0, 0, 0, 0, 0, 0}), FaceMesh({3, 4, 0, 0, 0, 2}), FaceMesh({3, 4, 1, 0, 0, 4})};
  const train::Sequence gt{FaceMesh({0, 0, 0, 0, 0, 0}), FaceMesh({0, 0, 0, 0, 0, 1}), FaceMesh({0, 0, 0, 0, 0, 4})};
  const std::vector<std::size_t> both{0, 1};
  const std::vector<train::Sequence> div{train::Sequence(3, FaceMesh({0, 0, 0})), train::Sequence(3, FaceMesh({3, 4, 0})),
                                         train::Sequence(3, FaceMesh({0, 0, 12}))};
  // Hand-computed: LVE (0 + 25 + 26) / 3, V-LVE (25 + 1) / 2, FDD ((2 - 0) + (0 - 1)) / 2, diversity (5 + 12 + 13) / 3.
  const bool toys = train::lve(pred, gt, both) == 17.0 && train::vlve(pred, gt, both) == 13.0 &&
                    train::fdd(pred, gt, both) == 0.5 && train::diversity(div) == 10.0;
  const bool zeros = train::lve(pred, pred, both) == 0.0 && train::vlve(pred, pred, both) == 0.0 &&
                     train::fdd(pred, pred, both) == 0.0 && train::diversity({pred, pred}) == 0.0;
  const auto ds = synth::generate_dataset(10, 9, 100);
  train::BundleList all;
  for (const auto& b : ds.bundles) all.push_back(&b);
  const double s = train::eval_mse(train::oracle_predictor(), all, train::MseMode::single, 1);
  const double m = train::eval_mse(train::oracle_predictor(), all, train::MseMode::multi, 1);
  return {toys && zeros && s == 0.0 && m == 0.0,
          fmt("toy values %s; identical inputs %s; oracle MSE_S %g, MSE_M %g", toys ? "exact" : "WRONG",
              zeros ? "zero" : "NONZERO", s, m)};
}

// ---------------------------------------------------------------- 10

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AUBLEND_CLI) + " " + args + " >> '" + log.string() + "' 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string pipeline(const fs::path& root, const fs::path& log) {
  auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const auto data = root / "data";
  io::write_text(root / "cfg.json", R"({"epochs": 3, "lr": 0.001, "seed": 4,
    "model": {"latent": 8, "codebook_size": 16, "layers": 1, "heads": 2}})");
  const std::vector<std::string> steps = {
      "synth --count 10 --seed 11 --vertices 100 --poses 3 --out " + q(data),
      "train codebook --data " + q(data) + " --config " + q(root / "cfg.json") + " --out " + q(root / "cb.aubm"),
      "train styleblend --data " + q(data) + " --config " + q(root / "cfg.json") + " --codebook " +
          q(root / "cb.aubm") + " --out " + q(root / "models.aubm"),
      "predict --model " + q(root / "models.aubm") + " --template " + q(data / "identities" / "identity-009.aubd") +
          " --id probe --out " + q(root / "predicted.aubd"),
      "eval --models " + q(root / "models.aubm") + " --data " + q(data) + " --split all --report " +
          q(root / "eval.json"),
  };
  for (const auto& s : steps) {
    if (cli(s, log) != 0) return "FAILED: " + s;
  }
  return io::directory_manifest(root, {"cb.aubm.timing.json", "models.aubm.timing.json"});
}

Outcome determinism() {
  fixtures::TempDir a("accept-a"), b("accept-b"), logs("accept-logs");
  const auto ma = pipeline(a.path(), logs / "a.log");
  const auto mb = pipeline(b.path(), logs / "b.log");
  if (ma.rfind("FAILED", 0) == 0 || mb.rfind("FAILED", 0) == 0) {
    return {false, (ma.rfind("FAILED", 0) == 0 ? ma : mb) + "\n" + io::read_text(logs / "a.log")};
  }
  const auto lines = static_cast<std::size_t>(std::count(ma.begin(), ma.end(), '\n'));
  return {ma == mb, fmt("synth/train/predict/eval reruns: %zu artifacts, manifest %s", lines,
                        ma == mb ? io::fingerprint(ma).c_str() : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", gradient_fidelity},
      {2, "AdaLN-Zero identity at init", adaln_identity},
      {3, "straight-through quantizer", straight_through_quantizer},
      {4, "codebook overfit", codebook_overfit},
      {5, "StyleBlendNet learning signal", styleblend_signal},
      {6, "composition exactness", composition_exactness},
      {7, "blend latency", blend_latency},
      {8, "split arithmetic", split_arithmetic},
      {9, "metric oracles", metric_oracles},
      {10, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
