#include "aublend/mesh/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "aublend/error.hpp"

namespace aublend::mesh {

std::string to_string(AuId id) { return "AU" + std::to_string(id.value); }

std::optional<AuId> parse_au_id(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.size() >= 2 && (text[0] == 'A' || text[0] == 'a') && (text[1] == 'U' || text[1] == 'u')) {
    text.remove_prefix(2);
  }
  if (text.empty()) return std::nullopt;
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v > 0xffff) return std::nullopt;
  return AuId{static_cast<std::uint16_t>(v)};
}

namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " contains a non-finite coordinate");
  }
}

}  // namespace

FaceMesh::FaceMesh(std::vector<float> positions, std::vector<Triangle> triangles)
    : positions_(std::move(positions)), triangles_(std::move(triangles)) {
  if (positions_.empty() || positions_.size() % 3 != 0) {
    throw ValidationError("mesh positions must be a non-empty multiple of 3, got " +
                          std::to_string(positions_.size()));
  }
  require_finite(positions_, "mesh");
  const auto v = vertex_count();
  for (const auto& t : triangles_) {
    for (auto i : t) {
      if (i >= v) {
        throw ValidationError("triangle index " + std::to_string(i) + " out of range for " + std::to_string(v) +
                              " vertices");
      }
    }
  }
}

FaceMesh FaceMesh::with_topology(std::vector<Triangle> triangles) const {
  return FaceMesh(positions_, std::move(triangles));
}

std::size_t grid_columns(std::size_t vertex_count) {
  auto c = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(vertex_count))));
  while (c * c < vertex_count) ++c;
  while (c > 1 && (c - 1) * (c - 1) >= vertex_count) --c;
  return std::max<std::size_t>(c, 1);
}

std::vector<Triangle> grid_topology(std::size_t vertex_count) {
  const std::size_t cols = grid_columns(vertex_count);
  std::vector<Triangle> tris;
  for (std::size_t r = 0; (r + 1) * cols < vertex_count; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      const std::size_t a = r * cols + c, b = a + 1, d = a + cols, e = d + 1;
      if (e >= vertex_count) break;
      tris.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(b)});
      tris.push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(e)});
    }
  }
  return tris;
}

BasisSet::BasisSet(std::vector<BlendDelta> deltas, std::size_t vertex_count)
    : deltas_(std::move(deltas)), vertex_count_(vertex_count) {
  std::sort(deltas_.begin(), deltas_.end(), [](const auto& a, const auto& b) { return a.au < b.au; });
  for (std::size_t i = 0; i < deltas_.size(); ++i) {
    if (i > 0 && deltas_[i].au == deltas_[i - 1].au) {
      throw ValidationError("duplicate basis for " + to_string(deltas_[i].au));
    }
    if (deltas_[i].deltas.size() != 3 * vertex_count_) {
      throw ValidationError("basis " + to_string(deltas_[i].au) + " has " + std::to_string(deltas_[i].deltas.size()) +
                            " values, expected " + std::to_string(3 * vertex_count_));
    }
    require_finite(deltas_[i].deltas, "basis");
  }
}

const BlendDelta* BasisSet::find(AuId id) const {
  auto it = std::lower_bound(deltas_.begin(), deltas_.end(), id, [](const auto& d, AuId k) { return d.au < k; });
  return it != deltas_.end() && it->au == id ? &*it : nullptr;
}

const BlendDelta& BasisSet::at(AuId id) const {
  if (auto* d = find(id)) return *d;
  throw ValidationError("unknown AU id " + to_string(id));
}

std::vector<AuId> BasisSet::ids() const {
  std::vector<AuId> out;
  for (const auto& d : deltas_) out.push_back(d.au);
  return out;
}

float Activation::get(AuId id) const {
  auto it = weights_.find(id);
  return it == weights_.end() ? 0.0f : it->second;
}

Activation Activation::scaled(float factor) const {
  Activation out;
  for (auto [id, w] : weights_) out.set(id, w * factor);
  return out;
}

Activation parse_activation(std::string_view text) {
  Activation out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    pos = comma + 1;
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (item.empty()) {
      if (comma == text.size()) break;
      continue;
    }
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("activation item '" + std::string(item) + "' is not of the form AUk=w");
    }
    auto id = parse_au_id(item.substr(0, eq));
    if (!id) throw ValidationError("activation item '" + std::string(item) + "' has a malformed AU id");
    std::string w(item.substr(eq + 1));
    char* end = nullptr;
    const float weight = std::strtof(w.c_str(), &end);
    if (w.empty() || end != w.c_str() + w.size()) {
      throw ValidationError("activation item '" + std::string(item) + "' has a malformed weight");
    }
    out.set(*id, weight);
  }
  return out;
}

std::string format_activation(const Activation& a) {
  std::ostringstream os;
  bool first = true;
  for (auto [id, w] : a.weights()) {
    if (!first) os << ',';
    first = false;
    os << to_string(id) << '=' << w;
  }
  return os.str();
}

OffsetSequence::OffsetSequence(std::size_t frames, std::size_t vertex_count, float frame_rate, std::vector<float> data)
    : frames_(frames), vertex_count_(vertex_count), frame_rate_(frame_rate), data_(std::move(data)) {
  if (frames_ == 0 || vertex_count_ == 0) throw ValidationError("offset sequence needs T > 0 and V > 0");
  if (data_.size() != frames_ * 3 * vertex_count_) {
    throw ValidationError("offset sequence holds " + std::to_string(data_.size()) + " values, expected T*3V = " +
                          std::to_string(frames_ * 3 * vertex_count_));
  }
  if (!std::isfinite(frame_rate_) || frame_rate_ < 0.0f) throw ValidationError("offset sequence frame rate invalid");
  require_finite(data_, "offset sequence");
}

OffsetSequence OffsetSequence::constant(std::vector<float> offsets, float frame_rate) {
  const std::size_t v = offsets.size() / 3;
  return OffsetSequence(1, v, frame_rate, std::move(offsets));
}

std::span<const float> OffsetSequence::frame(std::size_t t) const {
  const std::size_t w = 3 * vertex_count_;
  return std::span<const float>(data_).subspan(t * w, w);
}

}  // namespace aublend::mesh
