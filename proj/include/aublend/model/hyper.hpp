#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace aublend::model {

struct HyperParams {
  std::size_t tokens = 32;      // N, one per AU
  std::size_t width = 0;        // W = 3V
  std::size_t latent = 64;      // D
  std::size_t codebook_size = 256;  // P
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
  double beta = 0.1;

  std::size_t tcn_kernel = 3;
  std::vector<std::size_t> tcn_dilations{1, 2, 4};
  std::size_t tcn_channels = 0;  // 0 means D

  // Fixed input/output normalisation, set from training data before init.
  double basis_scale = 1.0;
  double template_scale = 1.0;
  // The decoder's last layer starts at zero and its output is multiplied
  // by output_gain * basis_scale.
  double output_gain = 32.0;
  // Codebook space scale: encoder and projection outputs are multiplied by
  // it, the decoder input divided by it.
  double latent_scale = 1.0;

  std::size_t vertex_count() const { return width / 3; }
  std::size_t channels() const { return tcn_channels == 0 ? latent : tcn_channels; }

  bool operator==(const HyperParams&) const = default;
};

// ConfigError on any inconsistency (D % heads, P < 2, beta <= 0, ...).
void validate(const HyperParams& hp);

std::string to_json(const HyperParams& hp);
HyperParams hyper_from_json(const std::string& text);  // FormatError on malformed input

}  // namespace aublend::model
