#pragma once

#include <cstddef>
#include <vector>

#include "aublend/mesh/mesh.hpp"

namespace aublend::train {

using Sequence = std::vector<mesh::FaceMesh>;

// Mean over frames of the largest squared L2 error among the lip vertices.
double lve(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& lip_mask);
// LVE of the frame-to-frame velocities (T - 1 of them). ContractError if T < 2.
double vlve(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& lip_mask);
// Mean over upper-face vertices of std_t(|v_pred(t+1) - v_pred(t)|) minus the
// same for gt; signed. ContractError if T < 2.
double fdd(const Sequence& pred, const Sequence& gt, const std::vector<std::size_t>& upper_mask);
// Mean over unordered sequence pairs of the mean per-vertex L2 distance
// (over frames and vertices). ContractError for fewer than 2 sequences.
double diversity(const std::vector<Sequence>& sequences);

}  // namespace aublend::train
