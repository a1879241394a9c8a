#include "aublend/model/hyper.hpp"

#include <cmath>

#include "aublend/error.hpp"
#include "json.hpp"

namespace aublend::model {

using nlohmann::json;

void validate(const HyperParams& hp) {
  auto fail = [](const std::string& m) { throw ConfigError("hyperparameters: " + m); };
  if (hp.tokens == 0) fail("tokens must be positive");
  if (hp.width == 0 || hp.width % 3 != 0) fail("width must be a positive multiple of 3, got " + std::to_string(hp.width));
  if (hp.latent == 0) fail("latent dimension must be positive");
  if (hp.heads == 0 || hp.latent % hp.heads != 0) {
    fail("latent dimension " + std::to_string(hp.latent) + " is not divisible by " + std::to_string(hp.heads) +
         " heads");
  }
  if (hp.codebook_size < 2) fail("codebook needs at least 2 entries");
  if (!(hp.beta > 0.0)) fail("beta must be positive");
  if (hp.ffn_mult == 0) fail("ffn_mult must be positive");
  if (hp.tcn_kernel == 0) fail("tcn kernel must be positive");
  if (hp.tcn_dilations.empty()) fail("tcn needs at least one layer");
  for (auto d : hp.tcn_dilations) {
    if (d == 0) fail("tcn dilations must be positive");
    if ((hp.tcn_kernel - 1) * d + 1 > hp.tokens) fail("tcn receptive span exceeds the token count");
  }
  if (!(hp.basis_scale > 0.0) || !std::isfinite(hp.basis_scale)) fail("basis_scale must be positive");
  if (!(hp.template_scale > 0.0) || !std::isfinite(hp.template_scale)) fail("template_scale must be positive");
  if (!(hp.latent_scale > 0.0) || !std::isfinite(hp.latent_scale)) fail("latent_scale must be positive");
  if (!(hp.output_gain > 0.0) || !std::isfinite(hp.output_gain)) fail("output_gain must be positive");
}

std::string to_json(const HyperParams& hp) {
  json j;
  j["tokens"] = hp.tokens;
  j["width"] = hp.width;
  j["latent"] = hp.latent;
  j["codebook_size"] = hp.codebook_size;
  j["layers"] = hp.layers;
  j["heads"] = hp.heads;
  j["ffn_mult"] = hp.ffn_mult;
  j["beta"] = hp.beta;
  j["tcn_kernel"] = hp.tcn_kernel;
  j["tcn_dilations"] = hp.tcn_dilations;
  j["tcn_channels"] = hp.tcn_channels;
  j["basis_scale"] = hp.basis_scale;
  j["template_scale"] = hp.template_scale;
  j["output_gain"] = hp.output_gain;
  j["latent_scale"] = hp.latent_scale;
  return j.dump();
}

HyperParams hyper_from_json(const std::string& text) {
  HyperParams hp;
  try {
    const json j = json::parse(text);
    hp.tokens = j.at("tokens").get<std::size_t>();
    hp.width = j.at("width").get<std::size_t>();
    hp.latent = j.at("latent").get<std::size_t>();
    hp.codebook_size = j.at("codebook_size").get<std::size_t>();
    hp.layers = j.at("layers").get<std::size_t>();
    hp.heads = j.at("heads").get<std::size_t>();
    hp.ffn_mult = j.at("ffn_mult").get<std::size_t>();
    hp.beta = j.at("beta").get<double>();
    hp.tcn_kernel = j.at("tcn_kernel").get<std::size_t>();
    hp.tcn_dilations = j.at("tcn_dilations").get<std::vector<std::size_t>>();
    hp.tcn_channels = j.at("tcn_channels").get<std::size_t>();
    hp.basis_scale = j.at("basis_scale").get<double>();
    hp.template_scale = j.at("template_scale").get<double>();
    hp.output_gain = j.at("output_gain").get<double>();
    hp.latent_scale = j.at("latent_scale").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("hyperparameters: ") + e.what());
  }
  return hp;
}

}  // namespace aublend::model
