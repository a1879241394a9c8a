#include "aublend/synth/generator.hpp"

#include <cmath>
#include <cstdio>

#include "aublend/error.hpp"
#include "aublend/mesh/compose.hpp"

namespace aublend::synth {

namespace {

double gauss2(double dx, double sx, double dy, double sy) {
  const double u = dx / sx;
  const double v = dy / sy;
  return std::exp(-0.5 * (u * u + v * v));
}

// Unit-amplitude landmark bumps of the neutral face, one per zone.
double feature_shape(Zone zone, double x, double y) {
  switch (zone) {
    case Zone::brow:
      return gauss2(x - 0.4, 0.22, y - 0.45, 0.07) + gauss2(x + 0.4, 0.22, y - 0.45, 0.07);
    case Zone::eye:
      return -(gauss2(x - 0.4, 0.15, y - 0.25, 0.09) + gauss2(x + 0.4, 0.15, y - 0.25, 0.09));
    case Zone::nose:
      return gauss2(x, 0.1, y, 0.22);
    case Zone::cheek:
      return gauss2(x - 0.55, 0.2, y + 0.15, 0.18) + gauss2(x + 0.55, 0.2, y + 0.15, 0.18);
    case Zone::mouth:
      return gauss2(x, 0.3, y + 0.5, 0.07);
    case Zone::jaw:
      return gauss2(x, 0.35, y + 0.82, 0.12);
  }
  return 0.0;
}

constexpr double kFeatureDepth[kZoneCount] = {0.05, 0.06, 0.12, 0.05, 0.04, 0.05};

void check_range(double v, double lo, double hi, const char* field) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError(std::string("style ") + field + " = " + std::to_string(v) + " outside [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  }
}

double lerp1(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

void validate(const StyleParams& s) {
  for (double f : s.face_scale) check_range(f, kFaceScaleMin, kFaceScaleMax, "face_scale");
  check_range(s.asymmetry, 0.0, kAsymmetryMax, "asymmetry");
  check_range(s.exaggeration, kExaggerationMin, kExaggerationMax, "exaggeration");
  for (double g : s.region_gains) check_range(g, kRegionGainMin, kRegionGainMax, "region_gain");
  check_range(s.age_factor, 0.0, 1.0, "age_factor");
  check_range(s.gender_factor, 0.0, 1.0, "gender_factor");
}

StyleParams sample_style(Rng& rng) {
  StyleParams s;
  s.seed = rng.next_u64();
  for (auto& f : s.face_scale) f = rng.uniform(kFaceScaleMin, kFaceScaleMax);
  s.asymmetry = rng.uniform(0.0, kAsymmetryMax);
  s.exaggeration = rng.uniform(kExaggerationMin, kExaggerationMax);
  for (auto& g : s.region_gains) g = rng.uniform(kRegionGainMin, kRegionGainMax);
  s.age_factor = rng.uniform();
  s.gender_factor = rng.uniform();
  return s;
}

StyleParams lerp(const StyleParams& a, const StyleParams& b, double t, std::uint64_t seed) {
  StyleParams s;
  s.seed = seed;
  for (std::size_t i = 0; i < 3; ++i) s.face_scale[i] = lerp1(a.face_scale[i], b.face_scale[i], t);
  s.asymmetry = lerp1(a.asymmetry, b.asymmetry, t);
  s.exaggeration = lerp1(a.exaggeration, b.exaggeration, t);
  for (std::size_t i = 0; i < kZoneCount; ++i) s.region_gains[i] = lerp1(a.region_gains[i], b.region_gains[i], t);
  s.age_factor = lerp1(a.age_factor, b.age_factor, t);
  s.gender_factor = lerp1(a.gender_factor, b.gender_factor, t);
  return s;
}

std::vector<double> canonical_field(const facs::AUDescriptor& au, const FaceLayout& layout, std::size_t lattice_size) {
  const std::size_t n = lattice_size;
  // Splat the motion controls onto the lattice nodes.
  std::vector<double> grid(n * n * 3, 0.0);
  auto splat = [&](double col, double row, std::array<double, 3> d, double radius) {
    const double inv = 1.0 / (2.0 * radius * radius);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double dc = static_cast<double>(c) - col;
        const double dr = static_cast<double>(r) - row;
        const double w = std::exp(-(dc * dc + dr * dr) * inv);
        for (std::size_t a = 0; a < 3; ++a) grid[(r * n + c) * 3 + a] += w * d[a];
      }
    }
  };
  for (const auto& m : au.motion) {
    splat(m.col, m.row, m.displacement, m.radius);
    if (m.mirror) {
      splat(static_cast<double>(n - 1) - m.col, m.row, {-m.displacement[0], m.displacement[1], m.displacement[2]},
            m.radius);
    }
  }
  std::vector<Zone> zones;
  for (const auto& z : au.zones) zones.push_back(parse_zone(z));

  const std::size_t v = layout.vertex_count();
  const double span = static_cast<double>(n - 1);
  std::vector<double> out(3 * v, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    bool inside = false;
    for (Zone z : zones) inside = inside || layout.in_zone(z, i);
    if (!inside) continue;
    const double u = (layout.x(i) + 1.0) * 0.5 * span;
    const double w = (1.0 - layout.y(i)) * 0.5 * span;
    const auto c0 = std::min<std::size_t>(static_cast<std::size_t>(u), n - 2);
    const auto r0 = std::min<std::size_t>(static_cast<std::size_t>(w), n - 2);
    const double fu = u - static_cast<double>(c0);
    const double fw = w - static_cast<double>(r0);
    for (std::size_t a = 0; a < 3; ++a) {
      const double g00 = grid[(r0 * n + c0) * 3 + a];
      const double g01 = grid[(r0 * n + c0 + 1) * 3 + a];
      const double g10 = grid[((r0 + 1) * n + c0) * 3 + a];
      const double g11 = grid[((r0 + 1) * n + c0 + 1) * 3 + a];
      out[3 * i + a] = (1 - fw) * ((1 - fu) * g00 + fu * g01) + fw * ((1 - fu) * g10 + fu * g11);
    }
  }
  return out;
}

mesh::FaceMesh generate_template(const StyleParams& style, const FaceLayout& layout) {
  const std::size_t v = layout.vertex_count();
  std::vector<float> pos(3 * v);
  for (std::size_t i = 0; i < v; ++i) {
    const double x = layout.x(i);
    const double y = layout.y(i);
    const double asym = 1.0 + style.asymmetry * x;
    double z = 0.4 * (1.0 - 0.3 * x * x - 0.2 * y * y);
    for (std::size_t k = 0; k < kZoneCount; ++k) {
      const double amp = kFeatureDepth[k] * style.region_gains[k] * asym * style.exaggeration;
      z += amp * feature_shape(static_cast<Zone>(k), x, y);
    }
    // Cosmetic variation: forehead lines with age, lower-face width with gender.
    if (y > 0.6) z += 0.004 * style.age_factor * std::sin(30.0 * y) * (y - 0.6) / 0.4;
    const double width = 1.0 + 0.05 * (style.gender_factor - 0.5) * std::max(0.0, -y);
    pos[3 * i + 0] = static_cast<float>(x * width * style.face_scale[0]);
    pos[3 * i + 1] = static_cast<float>(y * style.face_scale[1]);
    pos[3 * i + 2] = static_cast<float>(z * style.face_scale[2]);
  }
  return mesh::FaceMesh(std::move(pos), mesh::grid_topology(v));
}

mesh::BasisSet generate_bases(const StyleParams& style, const FaceLayout& layout, const facs::Registry& registry) {
  const std::size_t v = layout.vertex_count();
  std::vector<mesh::BlendDelta> deltas;
  deltas.reserve(registry.list_aus().size());
  for (const auto& au : registry.list_aus()) {
    const auto canon = canonical_field(au, layout, registry.lattice_size());
    const double gain = style.region_gains[static_cast<std::size_t>(parse_zone(au.zones.front()))];
    mesh::BlendDelta d{au.id, std::vector<float>(3 * v)};
    for (std::size_t i = 0; i < v; ++i) {
      const double asym = 1.0 + style.asymmetry * layout.x(i);
      for (std::size_t a = 0; a < 3; ++a) {
        // Exaggeration is applied last so that scaling it by a power of two
        // scales every delta exactly.
        const double value = canon[3 * i + a] * style.face_scale[a] * gain * asym * style.exaggeration;
        d.deltas[3 * i + a] = static_cast<float>(value);
      }
    }
    deltas.push_back(std::move(d));
  }
  return mesh::BasisSet(std::move(deltas), v);
}

mesh::IdentityBundle generate_identity(const StyleParams& style, std::size_t vertex_count,
                                       const GeneratorOptions& options, const facs::Registry& registry) {
  validate(style);
  const FaceLayout layout(vertex_count);
  mesh::IdentityBundle bundle;
  if (options.identity_id.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "style-%016llx", static_cast<unsigned long long>(style.seed));
    bundle.identity_id = buf;
  } else {
    bundle.identity_id = options.identity_id;
  }
  bundle.templ = generate_template(style, layout);
  bundle.bases = generate_bases(style, layout, registry);
  if (options.pose_count > 0) {
    bundle.poses = generate_annotated_poses(bundle, options.pose_count, Rng::derive(style.seed, 0x9053));
  }
  bundle.style_meta["exaggeration"] = std::to_string(style.exaggeration);
  bundle.style_meta["asymmetry"] = std::to_string(style.asymmetry);
  bundle.style_meta["age_factor"] = std::to_string(style.age_factor);
  bundle.style_meta["gender_factor"] = std::to_string(style.gender_factor);
  return bundle;
}

mesh::Activation random_combination(Rng& rng, const std::vector<mesh::AuId>& ids) {
  if (ids.size() < 4) throw ContractError("random_combination needs at least 4 AUs");
  std::vector<mesh::AuId> pool = ids;
  const std::size_t count = 2 + static_cast<std::size_t>(rng.below(3));
  mesh::Activation a;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[pick]);
    a.set(pool[j], static_cast<float>(rng.uniform(0.3, 1.0)));
  }
  return a;
}

std::vector<mesh::AnnotatedPose> generate_annotated_poses(const mesh::IdentityBundle& bundle, std::size_t k,
                                                          std::uint64_t seed) {
  if (k == 0) throw ContractError("generate_annotated_poses needs k >= 1");
  const auto ids = bundle.bases.ids();
  Rng rng(seed);
  std::vector<mesh::AnnotatedPose> poses;
  poses.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    mesh::Activation a;
    if (i % 2 == 0) {
      a.set(ids[rng.below(ids.size())], static_cast<float>(rng.uniform(0.1, 1.0)));
    } else {
      a = random_combination(rng, ids);
    }
    auto m = mesh::compose(bundle.templ, bundle.bases, a);
    poses.push_back({std::move(a), std::move(m)});
  }
  return poses;
}

}  // namespace aublend::synth
