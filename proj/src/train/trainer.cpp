#include "aublend/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>

#include "aublend/ad/adam.hpp"
#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/model/losses.hpp"
#include "aublend/rng.hpp"
#include "json.hpp"

namespace aublend::train {

using nlohmann::json;

TrainConfig TrainConfig::defaults(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  c.epochs = stage == Stage::codebook ? 200 : 400;
  c.lr = stage == Stage::codebook ? 1e-4 : 1e-5;
  return c;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("lr must be positive");
  if (cfg.batch_size != 1) throw ConfigError("only batch_size 1 is supported");
}

TrainConfig config_from_json(const std::string& text, Stage stage) {
  TrainConfig c = TrainConfig::defaults(stage);
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("train config must be a JSON object");
    if (j.contains("stage")) {
      const auto s = j.at("stage").get<std::string>();
      if (s != (stage == Stage::codebook ? "codebook" : "styleblend")) {
        throw ConfigError("config is for stage '" + s + "'");
      }
    }
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
    const auto precision = j.value("precision", std::string("f64"));
    if (precision == "f64") {
      c.precision = Precision::f64;
    } else if (precision == "f32") {
      c.precision = Precision::f32;
    } else {
      throw ConfigError("precision must be f64 or f32");
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      auto& hp = c.hp;
      hp.latent = m.value("latent", hp.latent);
      hp.codebook_size = m.value("codebook_size", hp.codebook_size);
      hp.layers = m.value("layers", hp.layers);
      hp.heads = m.value("heads", hp.heads);
      hp.ffn_mult = m.value("ffn_mult", hp.ffn_mult);
      hp.beta = m.value("beta", hp.beta);
      hp.tcn_kernel = m.value("tcn_kernel", hp.tcn_kernel);
      hp.tcn_dilations = m.value("tcn_dilations", hp.tcn_dilations);
      hp.tcn_channels = m.value("tcn_channels", hp.tcn_channels);
      hp.output_gain = m.value("output_gain", hp.output_gain);
      hp.latent_scale = m.value("latent_scale", hp.latent_scale);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string to_json(const TrainConfig& c) {
  json j;
  j["stage"] = c.stage == Stage::codebook ? "codebook" : "styleblend";
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["snapshot_every"] = c.snapshot_every;
  j["precision"] = c.precision == Precision::f64 ? "f64" : "f32";
  j["model"] = {{"latent", c.hp.latent},         {"codebook_size", c.hp.codebook_size},
                {"layers", c.hp.layers},         {"heads", c.hp.heads},
                {"ffn_mult", c.hp.ffn_mult},     {"beta", c.hp.beta},
                {"tcn_kernel", c.hp.tcn_kernel}, {"tcn_dilations", c.hp.tcn_dilations},
                {"tcn_channels", c.hp.tcn_channels}, {"output_gain", c.hp.output_gain},
                {"latent_scale", c.hp.latent_scale}};
  return j.dump(2) + "\n";
}

std::string TrainReport::to_text() const {
  std::string out;
  char buf[256];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "# %s\t%.17g\n", key, v);
    out += buf;
  };
  out += std::string("# stage\t") + (stage == Stage::codebook ? "codebook" : "styleblend") + "\n";
  std::snprintf(buf, sizeof buf, "# best_epoch\t%zu\n", best_epoch);
  out += buf;
  line("best_val_mse", best_val_mse);
  line("train_basis_mse", train_basis_mse);
  line("delta_variance", delta_variance);
  line("utilization", final_utilization);
  out += "epoch\ttrain_loss\tval_mse\tutilization\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\n", r.epoch, r.train_loss, r.val_mse, r.utilization);
    out += buf;
  }
  return out;
}

void copy_values(const ad::ParamList& dst, const ad::ParamList& src) {
  if (dst.size() != src.size()) throw ContractError("copy_values: parameter lists differ in length");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].tensor.shape() != src[i].tensor.shape()) {
      throw ContractError("copy_values: shape mismatch for " + dst[i].name);
    }
    ad::Tensor d = dst[i].tensor;
    std::copy(src[i].tensor.values().begin(), src[i].tensor.values().end(), d.data().begin());
  }
}

std::string params_fingerprint(const ad::ParamList& params) {
  std::vector<std::uint8_t> bytes;
  for (const auto& p : params) {
    bytes.insert(bytes.end(), p.name.begin(), p.name.end());
    const auto v = p.tensor.values();
    const auto* raw = reinterpret_cast<const std::uint8_t*>(v.data());
    bytes.insert(bytes.end(), raw, raw + v.size() * sizeof(double));
  }
  return io::fingerprint(bytes);
}

mesh::BasisSet mean_basis(const BundleList& bundles) {
  if (bundles.empty()) throw ContractError("mean_basis of an empty set");
  const auto& first = bundles.front()->bases;
  std::vector<mesh::BlendDelta> out;
  for (const auto& d : first.deltas()) {
    std::vector<double> acc(d.deltas.size(), 0.0);
    for (const auto* b : bundles) {
      const auto& other = b->bases.at(d.au).deltas;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += other[i];
    }
    mesh::BlendDelta m{d.au, std::vector<float>(acc.size())};
    for (std::size_t i = 0; i < acc.size(); ++i) m.deltas[i] = static_cast<float>(acc[i] / bundles.size());
    out.push_back(std::move(m));
  }
  return mesh::BasisSet(std::move(out), first.vertex_count());
}

namespace {

using Clock = std::chrono::steady_clock;

struct Snapshot {
  std::vector<std::vector<double>> values;

  static Snapshot take(const ad::ParamList& params) {
    Snapshot s;
    for (const auto& p : params) s.values.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    return s;
  }
  void restore(const ad::ParamList& params) const {
    for (std::size_t i = 0; i < params.size(); ++i) {
      ad::Tensor t = params[i].tensor;
      std::copy(values[i].begin(), values[i].end(), t.data().begin());
    }
  }
};

void round_to_f32(const ad::ParamList& params) {
  for (const auto& p : params) {
    ad::Tensor t = p.tensor;
    for (auto& v : t.data()) v = static_cast<double>(static_cast<float>(v));
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(Rng::derive(seed, 0xE0C0 + epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

void check_inputs(const BundleList& train, const BundleList& val) {
  if (train.empty()) throw ContractError("training set is empty");
  const std::size_t v = train.front()->vertex_count();
  for (const auto* list : {&train, &val}) {
    for (const auto* b : *list) {
      if (b->vertex_count() != v) throw ValidationError("identity " + b->identity_id + " has a different vertex count");
      if (b->bases.ids() != train.front()->bases.ids()) {
        throw ValidationError("identity " + b->identity_id + " has a different AU set");
      }
    }
  }
}

double delta_std(const BundleList& bundles) {
  std::vector<const mesh::BasisSet*> sets;
  for (const auto* b : bundles) sets.push_back(&b->bases);
  return std::sqrt(mesh::delta_variance(sets));
}

[[noreturn]] void diverged(std::size_t epoch, const std::exception& e) {
  throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
}

void maybe_snapshot(const TrainConfig& cfg, std::size_t epoch, const std::function<void(const std::filesystem::path&)>& save) {
  if (cfg.snapshot_every == 0 || cfg.snapshot_dir.empty() || epoch % cfg.snapshot_every != 0) return;
  char name[32];
  std::snprintf(name, sizeof name, "epoch-%04zu.aubm", epoch);
  save(cfg.snapshot_dir / name);
}

// Encoder outputs of the training set, used to seed the codebook entries.
void seed_codebook(model::CodebookModel& m, const std::vector<ad::Tensor>& inputs, std::uint64_t seed) {
  ad::NoGradGuard guard;
  std::vector<std::vector<double>> pool;
  for (const auto& b : inputs) {
    const ad::Tensor z = model::encode(m, b);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      pool.emplace_back(z.values().begin() + r * z.cols(), z.values().begin() + (r + 1) * z.cols());
    }
  }
  Rng rng(Rng::derive(seed, 0xC0DE));
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
  auto entries = m.codebook.data();
  const std::size_t d = m.hp.latent;
  for (std::size_t k = 0; k < std::min(pool.size(), m.hp.codebook_size); ++k) {
    std::copy(pool[k].begin(), pool[k].end(), entries.begin() + k * d);
  }
}

}  // namespace

CodebookResult train_codebook(const TrainConfig& cfg, const BundleList& train, const BundleList& val) {
  validate(cfg);
  check_inputs(train, val);
  const auto start = Clock::now();
  model::HyperParams hp = cfg.hp;
  hp.width = 3 * train.front()->vertex_count();
  hp.basis_scale = delta_std(train);
  if (!(hp.basis_scale > 0.0)) hp.basis_scale = 1.0;
  model::CodebookModel m = model::CodebookModel::init(hp, cfg.seed);

  std::vector<ad::Tensor> inputs;
  for (const auto* b : train) inputs.push_back(model::flatten_bases(b->bases));
  seed_codebook(m, inputs, cfg.seed);
  const BundleList& held = val.empty() ? train : val;

  const auto params = m.params();
  auto adam = ad::make_adam(cfg.lr);
  TrainReport report;
  report.stage = Stage::codebook;
  report.delta_variance = hp.basis_scale * hp.basis_scale;
  Snapshot best;
  report.best_val_mse = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const BundleList& set) {
    double total = 0.0;
    for (const auto* b : set) total += mesh::basis_mse(model::reconstruct(m, b->bases), b->bases);
    return total / static_cast<double>(set.size());
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRow row;
    row.epoch = epoch;
    try {
      double loss_sum = 0.0;
      for (std::size_t i : epoch_order(train.size(), cfg.seed, epoch)) {
        ad::Tensor loss = model::codebook_objective(m, inputs[i]);
        loss_sum += loss.item();
        loss.backward();
        ad::adam_step(adam, params);
        if (cfg.precision == Precision::f32) round_to_f32(params);
      }
      row.train_loss = loss_sum / static_cast<double>(train.size());
      if (!std::isfinite(row.train_loss)) throw NumericError("non-finite loss");
      row.val_mse = evaluate(held);
    } catch (const NumericError& e) {
      diverged(epoch, e);
    }
    std::set<std::size_t> used;
    {
      ad::NoGradGuard guard;
      for (const auto& b : inputs) {
        for (auto k : model::nearest_entries(m.codebook, model::encode(m, b))) used.insert(k);
      }
    }
    row.utilization = static_cast<double>(used.size()) / static_cast<double>(hp.codebook_size);
    if (row.val_mse < report.best_val_mse) {
      report.best_val_mse = row.val_mse;
      report.best_epoch = epoch;
      report.final_utilization = row.utilization;
      best = Snapshot::take(params);
    }
    report.rows.push_back(row);
    maybe_snapshot(cfg, epoch, [&](const std::filesystem::path& p) { model::save_codebook(m, p); });
  }
  best.restore(params);
  report.train_basis_mse = evaluate(train);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return {std::move(m), std::move(report)};
}

StyleBlendResult train_styleblend(const TrainConfig& cfg, const BundleList& train, const BundleList& val,
                                  const model::CodebookModel& frozen_in) {
  validate(cfg);
  check_inputs(train, val);
  const auto start = Clock::now();
  if (frozen_in.hp.width != 3 * train.front()->vertex_count()) {
    throw ValidationError("codebook model expects " + std::to_string(frozen_in.hp.vertex_count()) +
                          " vertices, dataset has " + std::to_string(train.front()->vertex_count()));
  }
  model::CodebookModel frozen = model::CodebookModel::init(frozen_in.hp, 0);
  copy_values(frozen.params(), frozen_in.params());
  ad::set_requires_grad(frozen.params(), false);
  const std::string frozen_hash = params_fingerprint(frozen.params());

  // Style hyperparameters follow the codebook's shape; the config may only
  // change the styleblend-specific TCN settings.
  model::HyperParams hp = frozen.hp;
  hp.tcn_kernel = cfg.hp.tcn_kernel;
  hp.tcn_dilations = cfg.hp.tcn_dilations;
  hp.tcn_channels = cfg.hp.tcn_channels;
  const std::size_t w = hp.width;
  std::vector<double> mean(w, 0.0);
  for (const auto* b : train) {
    const auto p = b->templ.positions();
    for (std::size_t i = 0; i < w; ++i) mean[i] += p[i];
  }
  for (auto& v : mean) v /= static_cast<double>(train.size());
  double ss = 0.0;
  for (const auto* b : train) {
    const auto p = b->templ.positions();
    for (std::size_t i = 0; i < w; ++i) ss += (p[i] - mean[i]) * (p[i] - mean[i]);
  }
  hp.template_scale = std::sqrt(ss / static_cast<double>(w * train.size()));
  if (!(hp.template_scale > 1e-12)) hp.template_scale = 1.0;
  model::StyleBlendModel s = model::StyleBlendModel::init(hp, cfg.seed, mean);

  std::vector<ad::Tensor> targets_b;
  std::vector<std::vector<std::size_t>> targets_idx;
  {
    ad::NoGradGuard guard;
    for (const auto* b : train) {
      targets_b.push_back(model::flatten_bases(b->bases));
      targets_idx.push_back(model::nearest_entries(frozen.codebook, model::encode(frozen, targets_b.back())));
    }
  }
  // Anchor the initial prediction at the mean target token per AU, so the
  // network starts from the average identity and learns the deviation.
  {
    ad::NoGradGuard guard;
    const std::size_t n = hp.tokens * hp.latent;
    std::vector<double> anchor(n, 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const ad::Tensor target = ad::gather_rows(frozen.codebook, targets_idx[i]);
      const ad::Tensor start = model::styleblend_forward(s, train[i]->templ).projected;
      for (std::size_t k = 0; k < n; ++k) anchor[k] += target.values()[k] - start.values()[k];
    }
    auto dst = s.anchor.data();
    for (std::size_t k = 0; k < n; ++k) dst[k] = anchor[k] / static_cast<double>(train.size());
  }
  const BundleList& held = val.empty() ? train : val;
  auto evaluate = [&](const BundleList& set) {
    double total = 0.0;
    for (const auto* b : set) {
      total += mesh::basis_mse(model::predict_basis(s, frozen, b->templ, b->bases.ids()).bases, b->bases);
    }
    return total / static_cast<double>(set.size());
  };

  const auto params = s.params();
  auto adam = ad::make_adam(cfg.lr);
  TrainReport report;
  report.stage = Stage::styleblend;
  report.delta_variance = hp.basis_scale * hp.basis_scale;
  report.best_val_mse = std::numeric_limits<double>::infinity();
  Snapshot best;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRow row;
    row.epoch = epoch;
    std::set<std::size_t> used;
    try {
      double loss_sum = 0.0;
      for (std::size_t i : epoch_order(train.size(), cfg.seed, epoch)) {
        ad::Tensor loss = model::styleblend_objective(s, frozen, train[i]->templ, targets_b[i], targets_idx[i]);
        loss_sum += loss.item();
        loss.backward();
        ad::adam_step(adam, params);
        if (cfg.precision == Precision::f32) round_to_f32(params);
      }
      row.train_loss = loss_sum / static_cast<double>(train.size());
      if (!std::isfinite(row.train_loss)) throw NumericError("non-finite loss");
      row.val_mse = evaluate(held);
      ad::NoGradGuard guard;
      for (const auto* b : train) {
        for (auto k : model::nearest_entries(frozen.codebook, model::styleblend_tokens(s, b->templ))) used.insert(k);
      }
    } catch (const NumericError& e) {
      diverged(epoch, e);
    }
    row.utilization = static_cast<double>(used.size()) / static_cast<double>(hp.codebook_size);
    if (row.val_mse < report.best_val_mse) {
      report.best_val_mse = row.val_mse;
      report.best_epoch = epoch;
      report.final_utilization = row.utilization;
      best = Snapshot::take(params);
    }
    report.rows.push_back(row);
    maybe_snapshot(cfg, epoch, [&](const std::filesystem::path& p) { model::save_models({frozen, s}, p); });
  }
  best.restore(params);
  if (params_fingerprint(frozen.params()) != frozen_hash) {
    throw ContractError("frozen codebook parameters changed during styleblend training");
  }
  report.train_basis_mse = evaluate(train);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return {std::move(s), std::move(report)};
}

}  // namespace aublend::train
