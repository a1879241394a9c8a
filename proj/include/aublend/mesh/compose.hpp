#pragma once

#include <vector>

#include "aublend/mesh/mesh.hpp"

namespace aublend::mesh {

// template + sum_i w_i * delta_i over the active AUs, in AU-id order.
// Zero weights are skipped. Throws ValidationError for an AU missing from
// `bases` or a weight outside [0, 1].
FaceMesh compose(const FaceMesh& templ, const BasisSet& bases, const Activation& activation);

// The blended displacement alone (compose minus template), 3V floats.
std::vector<float> expression_offsets(const BasisSet& bases, const Activation& activation);

// Per frame: template + speech_t + expression_t. `expression` may be a
// single-frame sequence, which is broadcast over all frames.
std::vector<FaceMesh> compose_animated(const FaceMesh& templ, const OffsetSequence& speech,
                                       const OffsetSequence& expression);

// Mean squared coordinate difference over the 3V scalars.
double vertex_mse(const FaceMesh& a, const FaceMesh& b);
// vertex-style MSE of each AU delta pair, averaged over AUs. Key sets must match.
double basis_mse(const BasisSet& a, const BasisSet& b);

// Population variance over every scalar of every basis in `sets`.
double delta_variance(const std::vector<const BasisSet*>& sets);

}  // namespace aublend::mesh
