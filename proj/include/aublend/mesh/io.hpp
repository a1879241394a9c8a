#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "aublend/mesh/mesh.hpp"

namespace aublend::mesh {

inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::size_t kBasisCount = 32;

// Wavefront OBJ: `v x y z` and triangle `f i j k` lines (1-based), written
// with 9 significant digits so float32 coordinates round-trip exactly.
FaceMesh parse_obj(std::string_view text);
std::string format_obj(const FaceMesh& mesh);
FaceMesh load_obj(const std::filesystem::path& path);
void save_obj(const FaceMesh& mesh, const std::filesystem::path& path);

// Identity bundle, little-endian:
//   "AUBD" u32 version u32 V u32 N(=32) u32 pose_count
//   u32 id_len + id bytes
//   3V f32 template
//   N x (u16 au_id + 3V f32 deltas)
//   pose_count x (N f32 dense activation in basis order + 3V f32 positions)
//   u32 CRC32 of all preceding bytes
std::vector<std::uint8_t> encode_bundle(const IdentityBundle& bundle);
IdentityBundle decode_bundle(std::span<const std::uint8_t> bytes);
IdentityBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const IdentityBundle& bundle, const std::filesystem::path& path);

// Pose record list (augmentation output), little-endian:
//   "AUPS" u32 version u32 V u32 N u32 count
//   N x u16 au_id
//   count x (N f32 dense activation + 3V f32 positions)
//   u32 CRC32
std::vector<std::uint8_t> encode_poses(const std::vector<AuId>& au_order, const std::vector<AnnotatedPose>& poses,
                                       std::size_t vertex_count);
std::vector<AnnotatedPose> decode_poses(std::span<const std::uint8_t> bytes);

// "AUOS" u32 T u32 V f32 frame_rate, then T x 3V f32.
std::vector<std::uint8_t> encode_offsets(const OffsetSequence& seq);
OffsetSequence decode_offsets(std::span<const std::uint8_t> bytes);
OffsetSequence load_offsets(const std::filesystem::path& path);
void save_offsets(const OffsetSequence& seq, const std::filesystem::path& path);

}  // namespace aublend::mesh
