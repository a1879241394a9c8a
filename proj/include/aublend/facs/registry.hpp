#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aublend/mesh/mesh.hpp"

namespace aublend::facs {

enum class FaceRegion { upper, lower };

std::string to_string(FaceRegion region);

// One Gaussian splat of displacement on the synthetic generator's control
// lattice. Lattice coordinates: column 0 is the face's left edge, row 0
// the top. `mirror` adds the reflected splat with dx negated.
struct MotionControl {
  double col = 0.0;
  double row = 0.0;
  std::array<double, 3> displacement{};
  double radius = 0.8;
  bool mirror = false;

  bool operator==(const MotionControl&) const = default;
};

struct AUDescriptor {
  mesh::AuId id;
  std::string name;
  FaceRegion region = FaceRegion::upper;
  std::string notes;
  std::vector<std::string> zones;  // generator zones the AU may displace
  std::vector<MotionControl> motion;

  bool operator==(const AUDescriptor&) const = default;
};

struct EmotionPreset {
  std::string emotion;
  mesh::Activation activation;

  bool operator==(const EmotionPreset&) const = default;
};

struct Violation {
  mesh::AuId au;
  std::string message;
};

inline constexpr std::array<std::string_view, 7> kEmotionNames = {"happiness", "sadness", "surprise", "fear",
                                                                   "anger",     "disgust", "contempt"};
inline constexpr std::array<std::string_view, 6> kZoneNames = {"brow", "eye", "nose", "cheek", "mouth", "jaw"};

// The 32 retained AUs plus the emotion presets. Immutable after parsing.
class Registry {
 public:
  // Parses and validates the JSON fixture; FormatError on any defect.
  static Registry parse(std::string_view json_text);
  static Registry load(const std::filesystem::path& path);
  // The fixture compiled into the library (data/facs.json), or the file
  // named by $AUBLEND_FACS when set.
  static const Registry& builtin();

  std::string serialize() const;

  const std::vector<AUDescriptor>& list_aus() const { return aus_; }
  const std::vector<EmotionPreset>& presets() const { return presets_; }
  std::size_t lattice_size() const { return lattice_; }
  std::vector<mesh::AuId> ids() const;
  const AUDescriptor* find(mesh::AuId id) const;
  // Position of `id` in list_aus(); ValidationError when unregistered.
  std::size_t index_of(mesh::AuId id) const;

  // Case-insensitive; LookupError listing valid names otherwise.
  mesh::Activation emotion_to_activation(std::string_view emotion) const;

  std::vector<Violation> check_activation(const mesh::Activation& a) const;
  // Throws ValidationError whose message itemises every violation.
  void validate_activation(const mesh::Activation& a) const;

  bool operator==(const Registry&) const = default;

 private:
  std::size_t lattice_ = 9;
  std::vector<AUDescriptor> aus_;
  std::vector<EmotionPreset> presets_;
};

std::string format_violations(const std::vector<Violation>& violations);

}  // namespace aublend::facs
