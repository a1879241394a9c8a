#include "aublend/synth/face_layout.hpp"

#include <cmath>
#include <string>

#include "aublend/error.hpp"
#include "aublend/mesh/mesh.hpp"

namespace aublend::synth {

namespace {

constexpr std::string_view kZoneNames[kZoneCount] = {"brow", "eye", "nose", "cheek", "mouth", "jaw"};

}  // namespace

std::string_view to_string(Zone zone) { return kZoneNames[static_cast<std::size_t>(zone)]; }

Zone parse_zone(std::string_view name) {
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (kZoneNames[z] == name) return static_cast<Zone>(z);
  }
  throw ConfigError("unknown face zone '" + std::string(name) + "'");
}

FaceLayout::FaceLayout(std::size_t vertex_count) {
  if (vertex_count < 64) {
    throw ConfigError("synthetic face needs at least 64 vertices, got " + std::to_string(vertex_count));
  }
  columns_ = mesh::grid_columns(vertex_count);
  rows_ = (vertex_count + columns_ - 1) / columns_;
  x_.resize(vertex_count);
  y_.resize(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const auto c = static_cast<double>(i % columns_);
    const auto r = static_cast<double>(i / columns_);
    x_[i] = -1.0 + 2.0 * c / static_cast<double>(columns_ - 1);
    y_[i] = 1.0 - 2.0 * r / static_cast<double>(rows_ - 1);
  }
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (zone_indices(static_cast<Zone>(z)).empty()) {
      throw ConfigError("grid of " + std::to_string(vertex_count) + " vertices leaves the " +
                        std::string(kZoneNames[z]) + " zone empty");
    }
  }
  if (lip_indices().empty() || upper_face_indices().empty()) {
    throw ConfigError("grid of " + std::to_string(vertex_count) + " vertices leaves an evaluation mask empty");
  }
}

bool FaceLayout::in_zone(Zone zone, std::size_t i) const {
  const double x = x_[i];
  const double y = y_[i];
  const double ax = std::abs(x);
  switch (zone) {
    case Zone::brow:
      return y >= 0.3;
    case Zone::eye:
      return y >= 0.0 && y <= 0.55 && ax >= 0.1 && ax <= 0.85;
    case Zone::nose:
      return y >= -0.4 && y <= 0.35 && ax <= 0.35;
    case Zone::cheek:
      return y >= -0.5 && y <= 0.15 && ax >= 0.25;
    case Zone::mouth:
      return y >= -0.85 && y <= -0.15 && ax <= 0.75;
    case Zone::jaw:
      return y <= -0.35;
  }
  return false;
}

std::vector<std::size_t> FaceLayout::zone_indices(Zone zone) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (in_zone(zone, i)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FaceLayout::lip_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (y_[i] >= -0.75 && y_[i] <= -0.25 && std::abs(x_[i]) <= 0.55) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FaceLayout::upper_face_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (y_[i] >= 0.0) out.push_back(i);
  }
  return out;
}

}  // namespace aublend::synth
