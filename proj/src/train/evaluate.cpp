#include "aublend/train/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/facs/registry.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/rng.hpp"
#include "aublend/synth/generator.hpp"
#include "aublend/synth/speech.hpp"
#include "aublend/train/metrics.hpp"
#include "json.hpp"

namespace aublend::train {

BasisPredictor oracle_predictor() {
  return [](const mesh::IdentityBundle& b) { return b.bases; };
}

BasisPredictor model_predictor(const model::ModelPair& models) {
  return [&models](const mesh::IdentityBundle& b) {
    return model::predict_basis(models.style, models.codebook, b.templ, b.bases.ids()).bases;
  };
}

namespace {

std::uint64_t identity_salt(const std::string& id) { return std::stoull(io::fingerprint(id), nullptr, 16); }

BundleList sorted_by_id(const BundleList& bundles) {
  BundleList out = bundles;
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->identity_id < b->identity_id; });
  return out;
}

}  // namespace

std::vector<mesh::Activation> multi_combinations(const mesh::IdentityBundle& bundle, std::uint64_t seed,
                                                 std::size_t count) {
  Rng rng(Rng::derive(seed, identity_salt(bundle.identity_id)));
  const auto ids = bundle.bases.ids();
  std::vector<mesh::Activation> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(synth::random_combination(rng, ids));
  return out;
}

double eval_mse(const BasisPredictor& predict, const BundleList& bundles, MseMode mode, std::uint64_t seed) {
  if (bundles.empty()) throw ContractError("eval_mse: no identities");
  double total = 0.0;
  for (const auto* b : sorted_by_id(bundles)) {
    const mesh::BasisSet pred = predict(*b);
    std::vector<mesh::Activation> acts;
    if (mode == MseMode::single) {
      for (auto id : b->bases.ids()) acts.push_back({{id, 1.0f}});
    } else {
      acts = multi_combinations(*b, seed);
    }
    double sum = 0.0;
    for (const auto& a : acts) {
      sum += mesh::vertex_mse(mesh::compose(b->templ, pred, a), mesh::compose(b->templ, b->bases, a));
    }
    total += sum / static_cast<double>(acts.size());
  }
  return total / static_cast<double>(bundles.size());
}

AnimationMetrics eval_animation(const BasisPredictor& predict, const BundleList& bundles,
                                const std::vector<std::size_t>& lip_mask, const std::vector<std::size_t>& upper_mask,
                                std::uint64_t seed, std::size_t frames, float frame_rate) {
  if (bundles.empty()) throw ContractError("eval_animation: no identities");
  const auto& registry = facs::Registry::builtin();
  const auto ordered = sorted_by_id(bundles);
  const synth::FaceLayout layout(ordered.front()->vertex_count());
  const auto speech = synth::synth_speech_offsets(layout, frames, frame_rate, seed);
  AnimationMetrics m;
  std::size_t runs = 0;
  // Per emotion, the predicted displacement sequences of every identity.
  std::vector<std::vector<Sequence>> offsets(registry.presets().size());
  for (const auto* b : ordered) {
    const mesh::BasisSet pred = predict(*b);
    for (std::size_t e = 0; e < registry.presets().size(); ++e) {
      const auto& act = registry.presets()[e].activation;
      const auto ep = mesh::OffsetSequence::constant(mesh::expression_offsets(pred, act), frame_rate);
      const auto eg = mesh::OffsetSequence::constant(mesh::expression_offsets(b->bases, act), frame_rate);
      const Sequence sp = mesh::compose_animated(b->templ, speech, ep);
      const Sequence sg = mesh::compose_animated(b->templ, speech, eg);
      m.lve += lve(sp, sg, lip_mask);
      m.vlve += vlve(sp, sg, lip_mask);
      m.fdd += fdd(sp, sg, upper_mask);
      ++runs;
      const mesh::FaceMesh zero(std::vector<float>(3 * b->vertex_count(), 0.0f));
      offsets[e].push_back(mesh::compose_animated(zero, speech, ep));
    }
  }
  m.lve /= static_cast<double>(runs);
  m.vlve /= static_cast<double>(runs);
  m.fdd /= static_cast<double>(runs);
  if (ordered.size() >= 2) {
    for (const auto& seqs : offsets) m.diversity += diversity(seqs);
    m.diversity /= static_cast<double>(offsets.size());
  } else {
    m.diversity = std::nan("");
  }
  return m;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["identities"] = identities;
  j["mse_single"] = num(mse_single);
  j["mse_multi"] = num(mse_multi);
  j["basis_mse"] = num(basis_mse);
  j["lve"] = num(animation.lve);
  j["vlve"] = num(animation.vlve);
  j["fdd"] = num(animation.fdd);
  j["diversity"] = num(animation.diversity);
  return j.dump(2) + "\n";
}

EvalReport evaluate(const BasisPredictor& predict, const BundleList& bundles, const std::vector<std::size_t>& lip_mask,
                    const std::vector<std::size_t>& upper_mask, std::uint64_t seed) {
  EvalReport r;
  const auto ordered = sorted_by_id(bundles);
  for (const auto* b : ordered) r.identities.push_back(b->identity_id);
  r.mse_single = eval_mse(predict, bundles, MseMode::single, seed);
  r.mse_multi = eval_mse(predict, bundles, MseMode::multi, seed);
  double basis = 0.0;
  for (const auto* b : ordered) basis += mesh::basis_mse(predict(*b), b->bases);
  r.basis_mse = basis / static_cast<double>(bundles.size());
  r.animation = eval_animation(predict, bundles, lip_mask, upper_mask, seed);
  return r;
}

}  // namespace aublend::train
