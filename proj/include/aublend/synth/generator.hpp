#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aublend/facs/registry.hpp"
#include "aublend/mesh/mesh.hpp"
#include "aublend/rng.hpp"
#include "aublend/synth/face_layout.hpp"

namespace aublend::synth {

struct StyleParams {
  std::uint64_t seed = 0;
  std::array<double, 3> face_scale{1.0, 1.0, 1.0};
  double asymmetry = 0.0;     // [0, 0.3]
  double exaggeration = 1.0;  // [0.5, 1.5]
  std::array<double, kZoneCount> region_gains{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  double age_factor = 0.5;     // [0, 1], cosmetic
  double gender_factor = 0.5;  // [0, 1], cosmetic

  bool operator==(const StyleParams&) const = default;
};

// Ranges used when sampling styles.
inline constexpr double kFaceScaleMin = 0.9, kFaceScaleMax = 1.1;
inline constexpr double kAsymmetryMax = 0.3;
inline constexpr double kExaggerationMin = 0.5, kExaggerationMax = 1.5;
inline constexpr double kRegionGainMin = 0.8, kRegionGainMax = 1.2;

// ConfigError when any field is out of range.
void validate(const StyleParams& style);
StyleParams sample_style(Rng& rng);
// Componentwise linear blend; the seed is taken from `seed`.
StyleParams lerp(const StyleParams& a, const StyleParams& b, double t, std::uint64_t seed);

// Per-AU displacement field before any style modulation (3V floats as
// doubles), zero outside the AU's zones.
std::vector<double> canonical_field(const facs::AUDescriptor& au, const FaceLayout& layout,
                                    std::size_t lattice_size);

struct GeneratorOptions {
  std::size_t pose_count = 8;
  std::string identity_id;  // defaults to "style-<seed hex>"
};

// Deterministic bundle: template, 32 bases and annotated poses, all pure
// functions of (style, V, options). Topology is the grid triangulation.
mesh::IdentityBundle generate_identity(const StyleParams& style, std::size_t vertex_count,
                                       const GeneratorOptions& options = {},
                                       const facs::Registry& registry = facs::Registry::builtin());

mesh::FaceMesh generate_template(const StyleParams& style, const FaceLayout& layout);
mesh::BasisSet generate_bases(const StyleParams& style, const FaceLayout& layout,
                              const facs::Registry& registry = facs::Registry::builtin());

// k poses alternating single-AU (intensity in [0.1, 1]) and 2-4 AU
// combinations (intensities in [0.3, 1]); meshes are compose() outputs.
// ContractError if k == 0.
std::vector<mesh::AnnotatedPose> generate_annotated_poses(const mesh::IdentityBundle& bundle, std::size_t k,
                                                          std::uint64_t seed);

// Random 2-4 AU activation with intensities in [0.3, 1], used for posing
// and for multi-AU evaluation.
mesh::Activation random_combination(Rng& rng, const std::vector<mesh::AuId>& ids);

}  // namespace aublend::synth
