#pragma once

#include <vector>

#include "aublend/ad/tensor.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/styleblend.hpp"

namespace aublend::model {

// mean|B - B_hat| + mean((SG(Z) - Zq)^2) + beta * mean((Z - SG(Zq))^2)
ad::Tensor codebook_loss(const ad::Tensor& b, const ad::Tensor& b_hat, const ad::Tensor& z, const ad::Tensor& zq,
                         double beta);

// mean((B - B_pred)^2) + mean((Z_hat - SG(Zq))^2)
ad::Tensor styleblend_loss(const ad::Tensor& b, const ad::Tensor& b_pred, const ad::Tensor& z_hat,
                           const ad::Tensor& zq);

// Full training objectives. The `*_at` variants take the codebook indices
// instead of searching, so the argmin can be held fixed for gradient checks.
ad::Tensor codebook_objective(const CodebookModel& m, const ad::Tensor& b);
ad::Tensor codebook_objective_at(const CodebookModel& m, const ad::Tensor& b, const std::vector<std::size_t>& indices);

// `target_indices` select Zq (the quantised encoding of the ground truth);
// `pred_indices` select the entries decoded into B_pred.
ad::Tensor styleblend_objective_at(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                                   const ad::Tensor& b, const std::vector<std::size_t>& target_indices,
                                   const std::vector<std::size_t>& pred_indices);
ad::Tensor styleblend_objective(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                                const ad::Tensor& b, const std::vector<std::size_t>& target_indices);

}  // namespace aublend::model
