#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aublend/mesh/mesh.hpp"
#include "aublend/synth/generator.hpp"

namespace aublend::synth {

struct SplitSizes {
  std::size_t train = 0, val = 0, test = 0;
  bool operator==(const SplitSizes&) const = default;
};

// 8:1:1 with largest-remainder rounding (ties go to the earlier split).
SplitSizes split_sizes(std::size_t count);

struct DatasetSplit {
  std::vector<std::string> train, val, test;
  bool operator==(const DatasetSplit&) const = default;
};

struct DatasetOptions {
  std::size_t pose_count = 8;
  // Held-out (val/test) styles become blends of two training styles instead
  // of independent samples.
  bool interpolate_heldout = false;
};

struct Dataset {
  std::uint64_t seed = 0;
  std::size_t vertex_count = 0;
  DatasetOptions options;
  std::vector<mesh::IdentityBundle> bundles;  // index order matches `styles`
  std::vector<StyleParams> styles;
  DatasetSplit split;

  const mesh::IdentityBundle& bundle(const std::string& id) const;  // LookupError if absent
  std::vector<const mesh::IdentityBundle*> select(const std::vector<std::string>& ids) const;
};

// ContractError for count < 10.
Dataset generate_dataset(std::size_t count, std::uint64_t seed, std::size_t vertex_count,
                         const DatasetOptions& options = {});

// Directory layout:
//   dataset.json            seed, V, options, split, per-identity styles
//   identities/<id>.aubd    bundles
//   lip_mask.txt, upper_mask.txt   evaluation vertex index lists
//   manifest.txt            fingerprints of everything above
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// Whitespace-separated vertex indices.
void save_index_list(const std::vector<std::size_t>& indices, const std::filesystem::path& path);
std::vector<std::size_t> load_index_list(const std::filesystem::path& path);

}  // namespace aublend::synth
