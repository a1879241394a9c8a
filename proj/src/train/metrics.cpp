#include "aublend/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aublend/error.hpp"

namespace aublend::train {

namespace {

void check_pair(const Sequence& a, const Sequence& b, const char* what) {
  if (a.empty()) throw ContractError(std::string(what) + ": empty sequence");
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": frame counts differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  const std::size_t v = a.front().vertex_count();
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].vertex_count() != v || b[t].vertex_count() != v) {
      throw ValidationError(std::string(what) + ": vertex counts differ at frame " + std::to_string(t));
    }
  }
}

void check_mask(const std::vector<std::size_t>& mask, std::size_t v, const char* what) {
  if (mask.empty()) throw ContractError(std::string(what) + ": empty vertex mask");
  for (auto i : mask) {
    if (i >= v) throw ValidationError(std::string(what) + ": mask index " + std::to_string(i) + " out of range");
  }
}

double sq_dist(const float* a, const float* b) {
  const double dx = static_cast<double>(a[0]) - b[0];
  const double dy = static_cast<double>(a[1]) - b[1];
  const double dz = static_cast<double>(a[2]) - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Per-vertex velocity (frame t+1 minus frame t) in double.
void velocity(const Sequence& s, std::size_t t, std::size_t i, double out[3]) {
  const float* a = s[t].positions().data() + 3 * i;
  const float* b = s[t + 1].positions().data() + 3 * i;
  for (int k = 0; k < 3; ++k) out[k] = static_cast<double>(b[k]) - a[k];
}

}  // namespace

double lve(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& lip_mask) {
  check_pair(pred, gt, "lve");
  check_mask(lip_mask, pred.front().vertex_count(), "lve");
  double total = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    double worst = 0.0;
    for (auto i : lip_mask) {
      worst = std::max(worst, sq_dist(pred[t].positions().data() + 3 * i, gt[t].positions().data() + 3 * i));
    }
    total += worst;
  }
  return total / static_cast<double>(pred.size());
}

double vlve(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& lip_mask) {
  check_pair(pred, gt, "vlve");
  if (pred.size() < 2) throw ContractError("vlve needs at least 2 frames");
  check_mask(lip_mask, pred.front().vertex_count(), "vlve");
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < pred.size(); ++t) {
    double worst = 0.0;
    for (auto i : lip_mask) {
      double vp[3], vg[3];
      velocity(pred, t, i, vp);
      velocity(gt, t, i, vg);
      double e = 0.0;
      for (int k = 0; k < 3; ++k) e += (vp[k] - vg[k]) * (vp[k] - vg[k]);
      worst = std::max(worst, e);
    }
    total += worst;
  }
  return total / static_cast<double>(pred.size() - 1);
}

double fdd(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& upper_mask) {
  check_pair(pred, gt, "fdd");
  if (pred.size() < 2) throw ContractError("fdd needs at least 2 frames");
  check_mask(upper_mask, pred.front().vertex_count(), "fdd");
  const std::size_t steps = pred.size() - 1;
  auto motion_std = [&](const Sequence& s, std::size_t i) {
    std::vector<double> mag(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      double v[3];
      velocity(s, t, i, v);
      mag[t] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    double mean = 0.0;
    for (double m : mag) mean += m;
    mean /= static_cast<double>(steps);
    double var = 0.0;
    for (double m : mag) var += (m - mean) * (m - mean);
    return std::sqrt(var / static_cast<double>(steps));
  };
  double total = 0.0;
  for (auto i : upper_mask) total += motion_std(pred, i) - motion_std(gt, i);
  return total / static_cast<double>(upper_mask.size());
}

double diversity(const std::vector<Sequence>& sequences) {
  if (sequences.size() < 2) throw ContractError("diversity needs at least 2 sequences");
  for (std::size_t k = 1; k < sequences.size(); ++k) check_pair(sequences[0], sequences[k], "diversity");
  const std::size_t frames = sequences[0].size();
  const std::size_t v = sequences[0].front().vertex_count();
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < sequences.size(); ++a) {
    for (std::size_t b = a + 1; b < sequences.size(); ++b) {
      double sum = 0.0;
      for (std::size_t t = 0; t < frames; ++t) {
        const float* pa = sequences[a][t].positions().data();
        const float* pb = sequences[b][t].positions().data();
        for (std::size_t i = 0; i < v; ++i) sum += std::sqrt(sq_dist(pa + 3 * i, pb + 3 * i));
      }
      total += sum / static_cast<double>(frames * v);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace aublend::train
