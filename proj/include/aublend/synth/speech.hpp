#pragma once

#include <cstdint>

#include "aublend/mesh/mesh.hpp"
#include "aublend/synth/face_layout.hpp"

namespace aublend::synth {

// Procedural stand-in for a speech-driven model's lip offsets: jaw opening
// and lip rounding driven by a seeded syllable train. Offsets are confined
// to the lower face (y < 0).
mesh::OffsetSequence synth_speech_offsets(const FaceLayout& layout, std::size_t frames, float frame_rate,
                                          std::uint64_t seed);

}  // namespace aublend::synth
