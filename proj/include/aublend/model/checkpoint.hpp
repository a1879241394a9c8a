#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aublend/ad/nn.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/hyper.hpp"
#include "aublend/model/styleblend.hpp"

namespace aublend::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian:
//   "AUBM" u32 version, kind string, hyperparameter JSON string
//   u32 tensor_count, then per tensor: name string, u32 rank, rank x u32
//   extents, f32 payload
//   u32 CRC32
// Strings are u32 length + UTF-8 bytes.
struct Checkpoint {
  std::string kind;  // "codebook" or "styleblend"
  HyperParams hp;
  ad::ParamList tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

// Copies the checkpoint tensors named `prefix + name` into `targets`.
// FormatError on a missing tensor, a shape mismatch or an unused tensor
// under `prefix`.
void assign_tensors(const ad::ParamList& targets, const Checkpoint& ckpt, const std::string& prefix);

// The frozen pair used for prediction.
struct ModelPair {
  CodebookModel codebook;
  StyleBlendModel style;
};

void save_codebook(const CodebookModel& m, const std::filesystem::path& path);
CodebookModel load_codebook(const std::filesystem::path& path);
CodebookModel codebook_from(const Checkpoint& ckpt);

// A styleblend checkpoint embeds the frozen codebook model it was trained
// against ("codebook.*" next to "style.*").
void save_models(const ModelPair& pair, const std::filesystem::path& path);
ModelPair load_models(const std::filesystem::path& path);

}  // namespace aublend::model
