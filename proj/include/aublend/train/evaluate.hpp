#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aublend/mesh/mesh.hpp"
#include "aublend/model/checkpoint.hpp"
#include "aublend/train/trainer.hpp"

namespace aublend::train {

using BasisPredictor = std::function<mesh::BasisSet(const mesh::IdentityBundle&)>;

// Returns each bundle's own ground-truth bases.
BasisPredictor oracle_predictor();
BasisPredictor model_predictor(const model::ModelPair& models);

enum class MseMode { single, multi };

inline constexpr std::size_t kMultiCombinations = 20;

// The seeded multi-AU activations used for `bundle` (depends on the
// identity id, not on its position in the list).
std::vector<mesh::Activation> multi_combinations(const mesh::IdentityBundle& bundle, std::uint64_t seed,
                                                 std::size_t count = kMultiCombinations);

// Mean vertex_mse between poses composed from predicted and ground-truth
// bases: every AU at 1.0 (single) or the seeded combinations (multi).
// Identities are visited in id order so the result does not depend on the
// order of `bundles`.
double eval_mse(const BasisPredictor& predict, const BundleList& bundles, MseMode mode, std::uint64_t seed);

struct AnimationMetrics {
  double lve = 0.0;
  double vlve = 0.0;
  double fdd = 0.0;
  double diversity = 0.0;  // NaN with fewer than two identities
};

// Speech offsets (procedural, seeded) plus each emotion preset at full
// intensity, composed with predicted vs ground-truth bases.
AnimationMetrics eval_animation(const BasisPredictor& predict, const BundleList& bundles,
                                const std::vector<std::size_t>& lip_mask, const std::vector<std::size_t>& upper_mask,
                                std::uint64_t seed, std::size_t frames = 60, float frame_rate = 30.0f);

struct EvalReport {
  std::vector<std::string> identities;
  double mse_single = 0.0;
  double mse_multi = 0.0;
  AnimationMetrics animation;
  double basis_mse = 0.0;

  std::string to_json() const;
};

EvalReport evaluate(const BasisPredictor& predict, const BundleList& bundles, const std::vector<std::size_t>& lip_mask,
                    const std::vector<std::size_t>& upper_mask, std::uint64_t seed);

}  // namespace aublend::train
