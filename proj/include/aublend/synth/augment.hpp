#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aublend/mesh/mesh.hpp"

namespace aublend::synth {

struct AugmentationSummary {
  std::size_t rows = 0;
  std::filesystem::path manifest;
  std::string manifest_hash;
};

// Binary AU labels in bundle basis order, 1 where intensity >= 0.5.
std::vector<int> binarize_labels(const mesh::Activation& a, const std::vector<mesh::AuId>& order,
                                 float threshold = 0.5f);

// Writes <out>/<identity>.aups (pose format) and <out>/manifest.tsv with
// one row per sample: identity, "<file>#<index>", comma-separated labels.
AugmentationSummary export_augmentation(const std::vector<const mesh::IdentityBundle*>& bundles,
                                        std::size_t per_identity, std::uint64_t seed,
                                        const std::filesystem::path& out_dir);

}  // namespace aublend::synth
