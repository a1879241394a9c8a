#include "aublend/mesh/compose.hpp"

#include <cmath>

#include "aublend/error.hpp"

namespace aublend::mesh {

namespace {

struct Term {
  float weight;
  const float* delta;
};

std::vector<Term> active_terms(const BasisSet& bases, const Activation& activation) {
  std::vector<Term> terms;
  terms.reserve(activation.weights().size());
  for (auto [id, w] : activation.weights()) {
    const BlendDelta* d = bases.find(id);
    if (!d) throw ValidationError("unknown AU id " + to_string(id));
    if (!(w >= 0.0f && w <= 1.0f)) {
      throw ValidationError("weight " + std::to_string(w) + " for " + to_string(id) + " outside [0, 1]");
    }
    if (w != 0.0f) terms.push_back({w, d->deltas.data()});
  }
  return terms;
}

}  // namespace

FaceMesh compose(const FaceMesh& templ, const BasisSet& bases, const Activation& activation) {
  if (templ.vertex_count() != bases.vertex_count()) {
    throw ValidationError("template has " + std::to_string(templ.vertex_count()) + " vertices, bases have " +
                          std::to_string(bases.vertex_count()));
  }
  const auto terms = active_terms(bases, activation);
  std::vector<float> out(templ.positions().begin(), templ.positions().end());
  const std::size_t n = out.size();
  float* o = out.data();
  for (const auto& term : terms) {
    const float w = term.weight;
    const float* d = term.delta;
    for (std::size_t i = 0; i < n; ++i) o[i] += w * d[i];
  }
  return FaceMesh(std::move(out), templ.triangles());
}

std::vector<float> expression_offsets(const BasisSet& bases, const Activation& activation) {
  const auto terms = active_terms(bases, activation);
  std::vector<float> out(3 * bases.vertex_count(), 0.0f);
  for (const auto& term : terms) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += term.weight * term.delta[i];
  }
  return out;
}

std::vector<FaceMesh> compose_animated(const FaceMesh& templ, const OffsetSequence& speech,
                                       const OffsetSequence& expression) {
  const std::size_t v = templ.vertex_count();
  if (speech.vertex_count() != v || expression.vertex_count() != v) {
    throw ValidationError("vertex count mismatch: template " + std::to_string(v) + ", speech " +
                          std::to_string(speech.vertex_count()) + ", expression " +
                          std::to_string(expression.vertex_count()));
  }
  const bool broadcast = expression.frames() == 1;
  if (!broadcast && expression.frames() != speech.frames()) {
    throw ValidationError("frame count mismatch: speech " + std::to_string(speech.frames()) + ", expression " +
                          std::to_string(expression.frames()));
  }
  if (!broadcast && expression.frame_rate() != speech.frame_rate()) {
    throw ValidationError("frame rate mismatch between speech and expression offsets");
  }
  std::vector<FaceMesh> frames;
  frames.reserve(speech.frames());
  const auto base = templ.positions();
  for (std::size_t t = 0; t < speech.frames(); ++t) {
    auto s = speech.frame(t);
    auto e = expression.frame(broadcast ? 0 : t);
    std::vector<float> out(base.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = base[i] + s[i] + e[i];
    frames.emplace_back(std::move(out), templ.triangles());
  }
  return frames;
}

double vertex_mse(const FaceMesh& a, const FaceMesh& b) {
  if (a.vertex_count() != b.vertex_count()) {
    throw ValidationError("vertex_mse: " + std::to_string(a.vertex_count()) + " vs " +
                          std::to_string(b.vertex_count()) + " vertices");
  }
  auto pa = a.positions(), pb = b.positions();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

double basis_mse(const BasisSet& a, const BasisSet& b) {
  if (a.vertex_count() != b.vertex_count()) {
    throw ValidationError("basis_mse: " + std::to_string(a.vertex_count()) + " vs " +
                          std::to_string(b.vertex_count()) + " vertices");
  }
  if (a.ids() != b.ids()) throw ValidationError("basis_mse: AU key sets differ");
  if (a.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& da = a.deltas()[k].deltas;
    const auto& db = b.deltas()[k].deltas;
    double acc = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
      const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
      acc += d * d;
    }
    total += acc / static_cast<double>(da.size());
  }
  return total / static_cast<double>(a.size());
}

double delta_variance(const std::vector<const BasisSet*>& sets) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto* s : sets) {
    for (const auto& d : s->deltas()) {
      for (float v : d.deltas) {
        sum += v;
        sum_sq += static_cast<double>(v) * v;
        ++n;
      }
    }
  }
  if (n == 0) return 0.0;
  const double mean = sum / static_cast<double>(n);
  return sum_sq / static_cast<double>(n) - mean * mean;
}

}  // namespace aublend::mesh
