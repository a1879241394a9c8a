#include "aublend/synth/speech.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "aublend/error.hpp"
#include "aublend/rng.hpp"

namespace aublend::synth {

mesh::OffsetSequence synth_speech_offsets(const FaceLayout& layout, std::size_t frames, float frame_rate,
                                          std::uint64_t seed) {
  if (frames == 0) throw ContractError("speech offsets need at least one frame");
  if (!(frame_rate > 0.0f)) throw ConfigError("frame rate must be positive");
  Rng rng(seed);
  // Syllables of 0.15-0.3 s, each with its own opening and rounding.
  struct Syllable {
    double start, length, open, round;
  };
  const double duration = static_cast<double>(frames) / frame_rate;
  std::vector<Syllable> syllables;
  for (double t = 0.0; t < duration;) {
    Syllable s{t, rng.uniform(0.15, 0.3), rng.uniform(0.3, 1.0), rng.uniform(-1.0, 1.0)};
    syllables.push_back(s);
    t += s.length + rng.uniform(0.0, 0.1);
  }
  const std::size_t v = layout.vertex_count();
  std::vector<float> data(frames * 3 * v, 0.0f);
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / frame_rate;
    while (cursor + 1 < syllables.size() && t >= syllables[cursor + 1].start) ++cursor;
    const auto& s = syllables[cursor];
    const double phase = (t - s.start) / s.length;
    const double env = phase >= 0.0 && phase <= 1.0 ? std::sin(std::numbers::pi * phase) : 0.0;
    const double open = s.open * env;
    const double round = s.round * env;
    float* out = data.data() + f * 3 * v;
    for (std::size_t i = 0; i < v; ++i) {
      const double x = layout.x(i);
      const double y = layout.y(i);
      if (y >= 0.0) continue;
      const double w = std::exp(-0.5 * ((x / 0.35) * (x / 0.35) + ((y + 0.55) / 0.25) * ((y + 0.55) / 0.25)));
      const double below = y < -0.5 ? 1.0 : -0.25;
      out[3 * i + 0] = static_cast<float>(-0.02 * round * x * w);
      out[3 * i + 1] = static_cast<float>(-0.04 * open * below * w);
      out[3 * i + 2] = static_cast<float>(0.01 * round * w);
    }
  }
  return mesh::OffsetSequence(frames, v, frame_rate, std::move(data));
}

}  // namespace aublend::synth
