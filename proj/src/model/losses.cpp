#include "aublend/model/losses.hpp"

#include "aublend/ad/ops.hpp"
#include "aublend/error.hpp"

namespace aublend::model {

using ad::Tensor;

namespace {

void same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": " + ad::to_string(a.shape()) + " vs " + ad::to_string(b.shape()));
  }
}

}  // namespace

Tensor codebook_loss(const Tensor& b, const Tensor& b_hat, const Tensor& z, const Tensor& zq, double beta) {
  same_shape(b, b_hat, "codebook_loss bases");
  same_shape(z, zq, "codebook_loss tokens");
  Tensor recon = ad::mean(ad::abs(ad::sub(b, b_hat)));
  Tensor book = ad::mean(ad::square(ad::sub(ad::stop_gradient(z), zq)));
  Tensor commit = ad::mean(ad::square(ad::sub(z, ad::stop_gradient(zq))));
  return ad::add(ad::add(recon, book), ad::scale(commit, beta));
}

Tensor styleblend_loss(const Tensor& b, const Tensor& b_pred, const Tensor& z_hat, const Tensor& zq) {
  same_shape(b, b_pred, "styleblend_loss bases");
  same_shape(z_hat, zq, "styleblend_loss tokens");
  Tensor mesh_term = ad::mean(ad::square(ad::sub(b, b_pred)));
  Tensor latent = ad::mean(ad::square(ad::sub(z_hat, ad::stop_gradient(zq))));
  return ad::add(mesh_term, latent);
}

Tensor codebook_objective_at(const CodebookModel& m, const Tensor& b, const std::vector<std::size_t>& indices) {
  Tensor z = encode(m, b);
  Tensor zq = ad::gather_rows(m.codebook, indices);
  Tensor b_hat = decode(m, ad::straight_through(z, zq));
  return codebook_loss(b, b_hat, z, zq, m.hp.beta);
}

Tensor codebook_objective(const CodebookModel& m, const Tensor& b) {
  auto f = codebook_forward(m, b);
  return codebook_loss(b, f.b_hat, f.z, f.q.zq, m.hp.beta);
}

Tensor styleblend_objective_at(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                               const Tensor& b, const std::vector<std::size_t>& target_indices,
                               const std::vector<std::size_t>& pred_indices) {
  Tensor z_hat = styleblend_tokens(s, templ);
  Tensor zq = ad::gather_rows(c.codebook, target_indices);
  Tensor b_pred = decode(c, ad::straight_through(z_hat, ad::gather_rows(c.codebook, pred_indices)));
  return styleblend_loss(b, b_pred, z_hat, zq);
}

Tensor styleblend_objective(const StyleBlendModel& s, const CodebookModel& c, const mesh::FaceMesh& templ,
                            const Tensor& b, const std::vector<std::size_t>& target_indices) {
  Tensor z_hat = styleblend_tokens(s, templ);
  Tensor zq = ad::gather_rows(c.codebook, target_indices);
  Tensor b_pred = decode(c, ad::straight_through(z_hat, ad::gather_rows(c.codebook, nearest_entries(c.codebook, z_hat))));
  return styleblend_loss(b, b_pred, z_hat, zq);
}

}  // namespace aublend::model
