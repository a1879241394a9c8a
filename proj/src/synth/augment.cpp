#include "aublend/synth/augment.hpp"

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/io.hpp"
#include "aublend/rng.hpp"
#include "aublend/synth/generator.hpp"

namespace aublend::synth {

std::vector<int> binarize_labels(const mesh::Activation& a, const std::vector<mesh::AuId>& order, float threshold) {
  std::vector<int> out;
  out.reserve(order.size());
  for (auto id : order) out.push_back(a.get(id) >= threshold ? 1 : 0);
  return out;
}

AugmentationSummary export_augmentation(const std::vector<const mesh::IdentityBundle*>& bundles,
                                        std::size_t per_identity, std::uint64_t seed,
                                        const std::filesystem::path& out_dir) {
  if (per_identity == 0) throw ContractError("export_augmentation needs per_identity >= 1");
  std::string manifest = "# identity\tsample\tlabels\n";
  AugmentationSummary summary;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const auto& b = *bundles[i];
    const auto poses = generate_annotated_poses(b, per_identity, Rng::derive(seed, i));
    const auto order = b.bases.ids();
    const std::string file = b.identity_id + ".aups";
    const auto bytes = mesh::encode_poses(order, poses, b.vertex_count());
    try {
      io::write_file(out_dir / file, bytes);
    } catch (const Error& e) {
      throw FormatError("augmentation export to '" + (out_dir / file).string() + "' failed: " + e.what());
    }
    for (std::size_t k = 0; k < poses.size(); ++k) {
      std::string labels;
      for (int l : binarize_labels(poses[k].activation, order)) {
        if (!labels.empty()) labels += ',';
        labels += static_cast<char>('0' + l);
      }
      manifest += b.identity_id + "\t" + file + "#" + std::to_string(k) + "\t" + labels + "\n";
      ++summary.rows;
    }
  }
  summary.manifest = out_dir / "manifest.tsv";
  io::write_text(summary.manifest, manifest);
  summary.manifest_hash = io::fingerprint(manifest);
  return summary;
}

}  // namespace aublend::synth
