#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aublend/mesh/mesh.hpp"
#include "aublend/model/checkpoint.hpp"
#include "aublend/model/codebook.hpp"
#include "aublend/model/hyper.hpp"
#include "aublend/model/styleblend.hpp"

namespace aublend::train {

enum class Stage { codebook, styleblend };
enum class Precision { f64, f32 };

struct TrainConfig {
  Stage stage = Stage::codebook;
  std::size_t epochs = 200;
  double lr = 1e-4;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  std::size_t snapshot_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path snapshot_dir;
  Precision precision = Precision::f64;
  // Model shape; width and the normalisation scales are filled in from data.
  model::HyperParams hp;

  // 200 epochs at 1e-4 for the codebook, 400 at 1e-5 for styleblend.
  static TrainConfig defaults(Stage stage);
};

void validate(const TrainConfig& cfg);
// JSON config file. Absent keys take the stage defaults. ConfigError on
// malformed or out-of-range values.
TrainConfig config_from_json(const std::string& text, Stage stage);
std::string to_json(const TrainConfig& cfg);

struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
  double utilization = 0.0;  // fraction of codebook entries selected over the training set
};

struct TrainReport {
  Stage stage = Stage::codebook;
  std::vector<EpochRow> rows;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  double final_utilization = 0.0;
  double delta_variance = 0.0;  // of the training bases
  double train_basis_mse = 0.0;  // best checkpoint, training identities
  double wall_seconds = 0.0;    // not part of to_text(), so reports are reproducible

  // Tab-separated: a header block of "# key value" lines, then one row per epoch.
  std::string to_text() const;
};

struct CodebookResult {
  model::CodebookModel model;
  TrainReport report;
};

struct StyleBlendResult {
  model::StyleBlendModel model;
  TrainReport report;
};

using BundleList = std::vector<const mesh::IdentityBundle*>;

// Minimises the codebook objective over `train` with Adam (one identity
// per step, seeded shuffle per epoch) and returns the epoch with the lowest
// validation reconstruction basis_mse (the training set when `val` is
// empty). NumericError naming the epoch on divergence.
CodebookResult train_codebook(const TrainConfig& cfg, const BundleList& train, const BundleList& val);

// Same loop for the styleblend objective; `frozen` is copied and never
// updated (ContractError if its fingerprint changes).
StyleBlendResult train_styleblend(const TrainConfig& cfg, const BundleList& train, const BundleList& val,
                                  const model::CodebookModel& frozen);

// Deep copy of parameter values, and a fingerprint of them.
void copy_values(const ad::ParamList& dst, const ad::ParamList& src);
std::string params_fingerprint(const ad::ParamList& params);

// Mean basis over `bundles` (the baseline predictor).
mesh::BasisSet mean_basis(const BundleList& bundles);

}  // namespace aublend::train
