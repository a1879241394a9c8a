#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/mesh/io.hpp"
#include "aublend/synth/augment.hpp"
#include "aublend/synth/dataset.hpp"
#include "aublend/synth/speech.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace aublend;
using namespace aublend::synth;

TEST_SUITE_BEGIN("synth");

namespace {

mesh::AuId au(int n) { return mesh::AuId{static_cast<std::uint16_t>(n)}; }

StyleParams style(std::uint64_t seed) {
  Rng rng(seed);
  return sample_style(rng);
}

}  // namespace

TEST_CASE("face layout rejects tiny meshes") {
  CHECK_THROWS_AS(FaceLayout(63), ConfigError);
  CHECK_NOTHROW(FaceLayout(64));
  CHECK_NOTHROW(FaceLayout(529));
  const FaceLayout l(529);
  CHECK(l.columns() == 23);
  CHECK(l.x(0) == -1.0);
  CHECK(l.y(0) == 1.0);
  for (std::size_t z = 0; z < kZoneCount; ++z) CHECK_FALSE(l.zone_indices(static_cast<Zone>(z)).empty());
  CHECK_FALSE(l.lip_indices().empty());
  CHECK_FALSE(l.upper_face_indices().empty());
  CHECK_THROWS_AS(parse_zone("ear"), ConfigError);
}

TEST_CASE("style validation") {
  StyleParams s;
  CHECK_NOTHROW(validate(s));
  s.asymmetry = 0.31;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = {};
  s.exaggeration = 0.4;
  CHECK_THROWS_AS(validate(s), ConfigError);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) CHECK_NOTHROW(validate(sample_style(rng)));
}

TEST_CASE("identity generation is deterministic") {
  const auto s = style(42);
  const auto a = generate_identity(s, 529);
  const auto b = generate_identity(s, 529);
  CHECK(mesh::encode_bundle(a) == mesh::encode_bundle(b));
  CHECK(a.bases.size() == 32);
  CHECK(a.poses.size() == 8);
  CHECK(a.templ.has_topology());
}

TEST_CASE("exaggeration scales every delta exactly") {
  auto s = style(7);
  s.exaggeration = 1.0;
  const auto full = generate_bases(s, FaceLayout(529));
  s.exaggeration = 0.5;
  const auto half = generate_bases(s, FaceLayout(529));
  for (std::size_t k = 0; k < 32; ++k) {
    const auto& f = full.deltas()[k].deltas;
    const auto& h = half.deltas()[k].deltas;
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(h[i] == 0.5f * f[i]);
  }
}

TEST_CASE("AU deltas respect their region masks") {
  const FaceLayout layout(529);
  const auto& registry = facs::Registry::builtin();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto bases = generate_bases(style(seed), layout);
    for (const auto& d : bases.deltas()) {
      const auto* desc = registry.find(d.au);
      REQUIRE(desc != nullptr);
      std::size_t moved = 0;
      for (std::size_t i = 0; i < layout.vertex_count(); ++i) {
        const bool nonzero = d.deltas[3 * i] != 0.0f || d.deltas[3 * i + 1] != 0.0f || d.deltas[3 * i + 2] != 0.0f;
        if (!nonzero) continue;
        ++moved;
        bool in_any = false;
        for (const auto& z : desc->zones) in_any = in_any || layout.in_zone(parse_zone(z), i);
        CHECK(in_any);
        if (desc->region == facs::FaceRegion::upper) CHECK_FALSE(layout.in_jaw_guard(i));
        if (desc->region == facs::FaceRegion::lower) CHECK_FALSE(layout.in_forehead_guard(i));
      }
      CHECK(moved > 0);
    }
  }
  // AU12 in particular stays inside the mouth zone.
  const auto bases = generate_bases(style(9), layout);
  const auto& d12 = bases.at(au(12)).deltas;
  for (std::size_t i = 0; i < layout.vertex_count(); ++i) {
    if (d12[3 * i] != 0.0f || d12[3 * i + 1] != 0.0f || d12[3 * i + 2] != 0.0f) CHECK(layout.in_zone(Zone::mouth, i));
  }
}

TEST_CASE("style interpolation moves bases monotonically between endpoints") {
  const FaceLayout layout(529);
  const auto a = style(11), b = style(12);
  const auto ba = generate_bases(a, layout), bb = generate_bases(b, layout);
  double prev_a = -1.0, prev_b = 1e300;
  for (int k = 0; k <= 4; ++k) {
    const auto mid = generate_bases(lerp(a, b, k / 4.0, 99), layout);
    const double da = mesh::basis_mse(mid, ba), db = mesh::basis_mse(mid, bb);
    CHECK(da > prev_a);
    CHECK(db < prev_b);
    prev_a = da;
    prev_b = db;
  }
}

TEST_CASE("annotated poses are compose outputs") {
  const auto b = generate_identity(style(5), 200, {.pose_count = 0});
  const auto poses = generate_annotated_poses(b, 12, 77);
  REQUIRE(poses.size() == 12);
  const auto& registry = facs::Registry::builtin();
  bool saw_single = false, saw_multi = false;
  for (const auto& p : poses) {
    CHECK(p.mesh == mesh::compose(b.templ, b.bases, p.activation));
    CHECK(registry.check_activation(p.activation).empty());
    const auto n = p.activation.weights().size();
    saw_single = saw_single || n == 1;
    saw_multi = saw_multi || (n >= 2 && n <= 4);
    CHECK(n <= 4);
  }
  CHECK(saw_single);
  CHECK(saw_multi);
  CHECK_THROWS_AS(generate_annotated_poses(b, 0, 1), ContractError);
}

TEST_CASE("split sizes follow 8:1:1") {
  CHECK(split_sizes(10) == SplitSizes{8, 1, 1});
  CHECK(split_sizes(500) == SplitSizes{400, 50, 50});
  for (std::size_t n = 10; n < 60; ++n) {
    const auto s = split_sizes(n);
    CHECK(s.train + s.val + s.test == n);
  }
}

TEST_CASE("dataset generation") {
  const auto ds = generate_dataset(10, 3, 100, {.pose_count = 2});
  CHECK(ds.bundles.size() == 10);
  CHECK(ds.split.train.size() == 8);
  CHECK(ds.split.val.size() == 1);
  CHECK(ds.split.test.size() == 1);
  std::set<std::string> all;
  for (const auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) {
    for (const auto& id : *part) CHECK(all.insert(id).second);
  }
  CHECK(all.size() == 10);
  for (const auto& b : ds.bundles) CHECK(all.count(b.identity_id) == 1);

  const auto other = generate_dataset(10, 4, 100, {.pose_count = 2});
  bool differs = false;
  for (std::size_t i = 0; i < 10; ++i) {
    differs = differs || !(ds.bundles[i].bases == other.bundles[i].bases);
  }
  CHECK(differs);
  CHECK_THROWS_AS(generate_dataset(9, 1, 100), ContractError);
  CHECK_THROWS_AS(ds.bundle("missing"), LookupError);
}

TEST_CASE("interpolated held-out styles lie between training styles") {
  const auto ds = generate_dataset(10, 7, 100, {.pose_count = 1, .interpolate_heldout = true});
  for (std::size_t i = 8; i < 10; ++i) {
    const auto& s = ds.styles[i];
    CHECK(s.exaggeration >= kExaggerationMin);
    CHECK(s.exaggeration <= kExaggerationMax);
    // Some pair of training styles brackets every component.
    bool bracketed = false;
    for (std::size_t a = 0; a < 8 && !bracketed; ++a) {
      for (std::size_t b = 0; b < 8 && !bracketed; ++b) {
        const auto& sa = ds.styles[a];
        const auto& sb = ds.styles[b];
        const double t = (s.exaggeration - sa.exaggeration) / (sb.exaggeration - sa.exaggeration);
        if (!(t >= 0.25 && t <= 0.75)) continue;
        bool ok = true;
        for (std::size_t z = 0; z < kZoneCount; ++z) {
          const double want = sa.region_gains[z] + (sb.region_gains[z] - sa.region_gains[z]) * t;
          ok = ok && std::fabs(want - s.region_gains[z]) < 1e-9;
        }
        bracketed = ok;
      }
    }
    CHECK(bracketed);
  }
}

TEST_CASE("dataset save and load round trip") {
  fixtures::TempDir dir("dataset");
  const auto ds = generate_dataset(10, 5, 100, {.pose_count = 3});
  save_dataset(ds, dir.path());
  const auto back = load_dataset(dir.path());
  CHECK(back.seed == ds.seed);
  CHECK(back.split == ds.split);
  CHECK(back.styles == ds.styles);
  REQUIRE(back.bundles.size() == ds.bundles.size());
  for (std::size_t i = 0; i < ds.bundles.size(); ++i) {
    CHECK(mesh::encode_bundle(back.bundles[i]) == mesh::encode_bundle(ds.bundles[i]));
  }
  CHECK(load_index_list(dir / "lip_mask.txt") == FaceLayout(100).lip_indices());

  fixtures::TempDir again("dataset2");
  save_dataset(ds, again.path());
  CHECK(io::read_text(dir / "manifest.txt") == io::read_text(again / "manifest.txt"));

  std::filesystem::remove(dir / "identities" / (ds.bundles[0].identity_id + ".aubd"));
  CHECK_THROWS_AS(load_dataset(dir.path()), FormatError);
}

TEST_CASE("augmentation export") {
  fixtures::TempDir dir("augment");
  const auto ds = generate_dataset(10, 2, 100, {.pose_count = 1});
  std::vector<const mesh::IdentityBundle*> bundles;
  for (const auto& b : ds.bundles) bundles.push_back(&b);
  const auto summary = export_augmentation(bundles, 6, 13, dir / "a");
  CHECK(summary.rows == 60);
  std::size_t rows = 0;
  std::istringstream lines(io::read_text(summary.manifest));
  for (std::string l; std::getline(lines, l);) {
    if (!l.empty() && l[0] != '#') ++rows;
  }
  CHECK(rows == 60);
  const auto again = export_augmentation(bundles, 6, 13, dir / "b");
  CHECK(again.manifest_hash == summary.manifest_hash);
  const auto other = export_augmentation(bundles, 6, 14, dir / "c");
  CHECK(other.manifest_hash != summary.manifest_hash);

  const auto poses = mesh::decode_poses(io::read_file(dir / "a" / (ds.bundles[0].identity_id + ".aups")));
  CHECK(poses.size() == 6);
  for (const auto& p : poses) {
    const auto expect = mesh::compose(ds.bundles[0].templ, ds.bundles[0].bases, p.activation);
    CHECK(std::vector<float>(p.mesh.positions().begin(), p.mesh.positions().end()) ==
          std::vector<float>(expect.positions().begin(), expect.positions().end()));
  }
}

TEST_CASE("binarised labels") {
  const auto ids = facs::Registry::builtin().ids();
  const auto one = binarize_labels({{au(12), 1.0f}}, ids);
  CHECK(std::count(one.begin(), one.end(), 1) == 1);
  CHECK(one[facs::Registry::builtin().index_of(au(12))] == 1);
  const auto edge = binarize_labels({{au(1), 0.5f}, {au(2), 0.49f}}, ids);
  CHECK(edge[facs::Registry::builtin().index_of(au(1))] == 1);
  CHECK(edge[facs::Registry::builtin().index_of(au(2))] == 0);
}

TEST_CASE("procedural speech only moves the lower face") {
  const FaceLayout layout(529);
  const auto s = synth_speech_offsets(layout, 30, 30.0f, 1);
  CHECK(s.frames() == 30);
  CHECK(s.vertex_count() == 529);
  bool any = false;
  for (std::size_t t = 0; t < s.frames(); ++t) {
    const auto f = s.frame(t);
    for (std::size_t i = 0; i < 529; ++i) {
      const bool moved = f[3 * i] != 0.0f || f[3 * i + 1] != 0.0f || f[3 * i + 2] != 0.0f;
      any = any || moved;
      if (moved) CHECK(layout.y(i) < 0.0);
    }
  }
  CHECK(any);
  CHECK(synth_speech_offsets(layout, 30, 30.0f, 1) == s);
}

TEST_SUITE_END();
