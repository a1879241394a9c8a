#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace aublend::synth {

enum class Zone { brow, eye, nose, cheek, mouth, jaw };

inline constexpr std::size_t kZoneCount = 6;

std::string_view to_string(Zone zone);
Zone parse_zone(std::string_view name);  // ConfigError on unknown names

// Normalised coordinates of the synthetic grid face. Vertex i sits at
// column i % columns, row i / columns; x runs -1..1 left to right and y
// runs 1..-1 top to bottom. The last row may be partial.
class FaceLayout {
 public:
  // ConfigError if V < 64 or the grid leaves any zone or mask empty.
  explicit FaceLayout(std::size_t vertex_count);

  std::size_t vertex_count() const { return x_.size(); }
  std::size_t columns() const { return columns_; }
  std::size_t rows() const { return rows_; }
  double x(std::size_t i) const { return x_[i]; }
  double y(std::size_t i) const { return y_[i]; }

  bool in_zone(Zone zone, std::size_t i) const;
  // Vertices no upper-face AU may move, and vertices no lower-face AU may move.
  bool in_jaw_guard(std::size_t i) const { return y_[i] < -0.6; }
  bool in_forehead_guard(std::size_t i) const { return y_[i] > 0.4; }

  std::vector<std::size_t> zone_indices(Zone zone) const;
  // Evaluation masks for the animation metrics.
  std::vector<std::size_t> lip_indices() const;
  std::vector<std::size_t> upper_face_indices() const;

 private:
  std::size_t columns_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
};

}  // namespace aublend::synth
