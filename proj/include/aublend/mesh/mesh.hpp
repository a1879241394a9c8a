#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aublend::mesh {

// FACS action-unit number, e.g. 12 for AU12.
struct AuId {
  std::uint16_t value = 0;
  auto operator<=>(const AuId&) const = default;
};

std::string to_string(AuId id);
// Accepts "AU12", "au12" or "12".
std::optional<AuId> parse_au_id(std::string_view text);

using Triangle = std::array<std::uint32_t, 3>;

// Vertex positions stored vertex-major, xyz interleaved: [x0 y0 z0 x1 ...].
class FaceMesh {
 public:
  FaceMesh() = default;
  explicit FaceMesh(std::vector<float> positions, std::vector<Triangle> triangles = {});

  std::size_t vertex_count() const { return positions_.size() / 3; }
  std::span<const float> positions() const { return positions_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  bool has_topology() const { return !triangles_.empty(); }
  FaceMesh with_topology(std::vector<Triangle> triangles) const;

  bool operator==(const FaceMesh&) const = default;

 private:
  std::vector<float> positions_;
  std::vector<Triangle> triangles_;
};

// Row-major triangulation of the synthetic grid layout: `columns` vertices
// per row, the last row possibly partial. Only complete quads are meshed.
std::size_t grid_columns(std::size_t vertex_count);
std::vector<Triangle> grid_topology(std::size_t vertex_count);

struct BlendDelta {
  AuId au;
  std::vector<float> deltas;  // 3V, same layout as FaceMesh positions

  bool operator==(const BlendDelta&) const = default;
};

// The per-identity AU-blendshape bases, kept sorted by AU id.
class BasisSet {
 public:
  BasisSet() = default;
  BasisSet(std::vector<BlendDelta> deltas, std::size_t vertex_count);

  std::size_t size() const { return deltas_.size(); }
  std::size_t vertex_count() const { return vertex_count_; }
  std::span<const BlendDelta> deltas() const { return deltas_; }
  const BlendDelta* find(AuId id) const;
  const BlendDelta& at(AuId id) const;  // ValidationError if absent
  std::vector<AuId> ids() const;

  bool operator==(const BasisSet&) const = default;

 private:
  std::vector<BlendDelta> deltas_;
  std::size_t vertex_count_ = 0;
};

// Sparse AU intensities. Absent keys mean 0. Range checks happen where the
// activation is consumed (compose, registry validation), so an invalid
// activation can be built and reported on.
class Activation {
 public:
  Activation() = default;
  Activation(std::initializer_list<std::pair<const AuId, float>> init) : weights_(init) {}

  void set(AuId id, float weight) { weights_[id] = weight; }
  float get(AuId id) const;
  bool empty() const { return weights_.empty(); }
  const std::map<AuId, float>& weights() const { return weights_; }
  Activation scaled(float factor) const;

  bool operator==(const Activation&) const = default;

 private:
  std::map<AuId, float> weights_;
};

// "AU6=0.5,AU12=0.7"; whitespace tolerated, empty string is the empty activation.
Activation parse_activation(std::string_view text);
std::string format_activation(const Activation& a);

struct AnnotatedPose {
  Activation activation;
  FaceMesh mesh;

  bool operator==(const AnnotatedPose&) const = default;
};

struct IdentityBundle {
  std::string identity_id;
  FaceMesh templ;
  BasisSet bases;
  std::vector<AnnotatedPose> poses;
  std::map<std::string, std::string> style_meta;  // not persisted in the binary format

  std::size_t vertex_count() const { return templ.vertex_count(); }
};

// Per-frame displacement fields, T x 3V.
class OffsetSequence {
 public:
  OffsetSequence() = default;
  OffsetSequence(std::size_t frames, std::size_t vertex_count, float frame_rate, std::vector<float> data);

  // A single-frame sequence that broadcasts over any T.
  static OffsetSequence constant(std::vector<float> offsets, float frame_rate = 0.0f);

  std::size_t frames() const { return frames_; }
  std::size_t vertex_count() const { return vertex_count_; }
  float frame_rate() const { return frame_rate_; }
  std::span<const float> frame(std::size_t t) const;
  std::span<const float> data() const { return data_; }

  bool operator==(const OffsetSequence&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t vertex_count_ = 0;
  float frame_rate_ = 0.0f;
  std::vector<float> data_;
};

}  // namespace aublend::mesh
