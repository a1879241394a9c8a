// aublend command-line front end.
//
// Exit codes: 0 success, 1 usage error (bad flags, bad activation or
// emotion, bad config), 2 data/format error (unreadable or malformed
// files), 3 runtime error (divergence, internal failure).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/facs/registry.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/mesh/io.hpp"
#include "aublend/model/checkpoint.hpp"
#include "aublend/service/server.hpp"
#include "aublend/synth/augment.hpp"
#include "aublend/synth/dataset.hpp"
#include "aublend/synth/speech.hpp"
#include "aublend/train/evaluate.hpp"
#include "aublend/train/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace aublend;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

// A path to a file holding the inline grammar (newlines act as commas),
// or the inline text itself.
mesh::Activation read_activation(const std::string& arg) {
  std::string text = arg;
  std::error_code ec;
  if (!arg.empty() && fs::is_regular_file(arg, ec)) {
    text = io::read_text(arg);
    for (char& c : text) {
      if (c == '\n' || c == '\r') c = ',';
    }
    while (text.find(",,") != std::string::npos) text.replace(text.find(",,"), 2, ",");
    while (!text.empty() && (text.back() == ',' || text.back() == ' ')) text.pop_back();
    while (!text.empty() && text.front() == ',') text.erase(text.begin());
  }
  mesh::Activation a = mesh::parse_activation(text);
  facs::Registry::builtin().validate_activation(a);
  return a;
}

mesh::IdentityBundle read_bundle_or_template(const fs::path& path) {
  if (path.extension() == ".obj") {
    mesh::IdentityBundle b;
    b.identity_id = path.stem().string();
    b.templ = mesh::load_obj(path);
    return b;
  }
  return mesh::load_bundle(path);
}

train::BundleList select(const synth::Dataset& ds, const std::string& split) {
  if (split == "train") return ds.select(ds.split.train);
  if (split == "val") return ds.select(ds.split.val);
  if (split == "test") return ds.select(ds.split.test);
  if (split == "heldout") {
    auto out = ds.select(ds.split.val);
    for (auto* b : ds.select(ds.split.test)) out.push_back(b);
    return out;
  }
  train::BundleList all;
  for (const auto& b : ds.bundles) all.push_back(&b);
  return all;
}

void write_timing(const fs::path& artifact, double seconds) {
  nlohmann::json j = {{"artifact", artifact.filename().string()}, {"wall_seconds", seconds}};
  io::write_text(fs::path(artifact.string() + ".timing.json"), j.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AU-blendshape expression toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic identity dataset");
  std::size_t count = 10, vertices = 529, poses = 8;
  std::uint64_t seed = 0;
  bool interpolate = false;
  std::string out;
  synth_cmd->add_option("--count", count, "Number of identities (>= 10)")->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Dataset seed")->capture_default_str();
  synth_cmd->add_option("--vertices", vertices, "Vertices per face")->capture_default_str();
  synth_cmd->add_option("--poses", poses, "Annotated poses per identity")->capture_default_str();
  synth_cmd->add_flag("--interpolate-heldout", interpolate, "Held-out styles blend two training styles");
  synth_cmd->add_option("--out", out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the codebook or the style predictor");
  std::string stage_name, config_path, data, codebook_path, report_path;
  std::optional<std::size_t> epochs_override;
  std::optional<std::uint64_t> seed_override;
  train_cmd->add_option("stage", stage_name, "codebook | styleblend")
      ->required()
      ->check(CLI::IsMember({"codebook", "styleblend"}));
  train_cmd->add_option("--config", config_path, "JSON training config (defaults per stage)");
  train_cmd->add_option("--data", data, "Dataset directory")->required();
  train_cmd->add_option("--out", out, "Checkpoint path")->required();
  train_cmd->add_option("--codebook", codebook_path, "Frozen codebook checkpoint (styleblend stage)");
  train_cmd->add_option("--report", report_path, "Report path (default <out>.report.tsv)");
  train_cmd->add_option("--epochs", epochs_override, "Override the configured epoch count");
  train_cmd->add_option("--seed", seed_override, "Override the configured seed");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict stylised bases for a template");
  std::string model_path, template_path, identity_id;
  predict_cmd->add_option("--model", model_path, "Styleblend checkpoint")->required();
  predict_cmd->add_option("--template", template_path, "Template mesh (.obj) or bundle (.aubd)")->required();
  predict_cmd->add_option("--id", identity_id, "Identity id for the output bundle");
  predict_cmd->add_option("--out", out, "Output bundle (.aubd)")->required();

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "Blend an activation into a mesh");
  std::string bundle_path, activation_arg;
  compose_cmd->add_option("--bundle", bundle_path, "Identity bundle")->required();
  compose_cmd->add_option("--activation", activation_arg, "File or inline spec like AU6=0.5,AU12=0.7")->required();
  compose_cmd->add_option("--out", out, "Output OBJ")->required();

  // animate
  auto* animate_cmd = app.add_subcommand("animate", "Speech offsets plus an emotion expression");
  std::string speech_path, emotion;
  double intensity = 1.0;
  animate_cmd->add_option("--bundle", bundle_path, "Identity bundle")->required();
  animate_cmd->add_option("--speech-offsets", speech_path, "Speech offset sequence (.auos)")->required();
  animate_cmd->add_option("--emotion", emotion, "Emotion preset")->required();
  animate_cmd->add_option("--intensity", intensity, "Preset scale in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  animate_cmd->add_option("--out", out, "Output directory of OBJ frames")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predicted bases against ground truth");
  std::string models_path, split = "test";
  bool oracle = false;
  eval_cmd->add_option("--models", models_path, "Styleblend checkpoint");
  eval_cmd->add_flag("--oracle", oracle, "Use ground-truth bases instead of a model");
  eval_cmd->add_option("--data", data, "Dataset directory")->required();
  eval_cmd->add_option("--split", split, "train | val | test | heldout | all")
      ->check(CLI::IsMember({"train", "val", "test", "heldout", "all"}))
      ->capture_default_str();
  eval_cmd->add_option("--seed", seed, "Seed for multi-AU combinations and speech")->capture_default_str();
  eval_cmd->add_option("--report", report_path, "Report JSON path")->required();

  // export-augment
  auto* augment_cmd = app.add_subcommand("export-augment", "Write labelled augmentation samples");
  std::size_t per_identity = 16;
  augment_cmd->add_option("--data", data, "Dataset directory")->required();
  augment_cmd->add_option("--per-identity", per_identity, "Samples per identity")->capture_default_str();
  augment_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  augment_cmd->add_option("--out", out, "Output directory")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API for composition and prediction");
  std::string host = "127.0.0.1";
  int port = service::default_port();
  serve_cmd->add_option("--models", models_path, "Styleblend checkpoint (prediction disabled without)");
  serve_cmd->add_option("--data", data, "Dataset directory")->required();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port (default $AUBLEND_PORT or 8080)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      synth::DatasetOptions opts;
      opts.pose_count = poses;
      opts.interpolate_heldout = interpolate;
      const auto ds = synth::generate_dataset(count, seed, vertices, opts);
      synth::save_dataset(ds, out);
      const auto speech = synth::synth_speech_offsets(synth::FaceLayout(vertices), 60, 30.0f, seed);
      mesh::save_offsets(speech, fs::path(out) / "speech" / "synthetic.auos");
      std::printf("%zu identities (train %zu, val %zu, test %zu) -> %s\n", ds.bundles.size(), ds.split.train.size(),
                  ds.split.val.size(), ds.split.test.size(), out.c_str());
    } else if (*train_cmd) {
      const auto stage = stage_name == "codebook" ? train::Stage::codebook : train::Stage::styleblend;
      auto cfg = config_path.empty() ? train::TrainConfig::defaults(stage)
                                     : train::config_from_json(io::read_text(config_path), stage);
      if (epochs_override) cfg.epochs = *epochs_override;
      if (seed_override) cfg.seed = *seed_override;
      const auto ds = synth::load_dataset(data);
      const auto train_set = ds.select(ds.split.train);
      const auto val_set = ds.select(ds.split.val);
      const auto t0 = std::chrono::steady_clock::now();
      train::TrainReport report;
      if (stage == train::Stage::codebook) {
        auto result = train::train_codebook(cfg, train_set, val_set);
        model::save_codebook(result.model, out);
        report = result.report;
      } else {
        if (codebook_path.empty()) throw ConfigError("train styleblend: --codebook is required");
        const auto frozen = model::load_codebook(codebook_path);
        auto result = train::train_styleblend(cfg, train_set, val_set, frozen);
        model::save_models({frozen, result.model}, out);
        report = result.report;
      }
      const fs::path report_file = report_path.empty() ? fs::path(out + ".report.tsv") : fs::path(report_path);
      io::write_text(report_file, report.to_text());
      write_timing(out, seconds_since(t0));
      std::printf("best epoch %zu, val basis_mse %.6g, train basis_mse %.6g (%.4f of delta variance)\n",
                  report.best_epoch, report.best_val_mse, report.train_basis_mse,
                  report.train_basis_mse / report.delta_variance);
    } else if (*predict_cmd) {
      const auto models = model::load_models(model_path);
      mesh::IdentityBundle in = read_bundle_or_template(template_path);
      auto ids = in.bases.size() == 0 ? facs::Registry::builtin().ids() : in.bases.ids();
      auto pred = model::predict_basis(models.style, models.codebook, in.templ, ids);
      mesh::IdentityBundle outb;
      outb.identity_id = identity_id.empty() ? in.identity_id : identity_id;
      outb.templ = in.templ;
      outb.bases = std::move(pred.bases);
      mesh::save_bundle(outb, out);
      std::printf("predicted %zu bases for %s -> %s\n", outb.bases.size(), outb.identity_id.c_str(), out.c_str());
    } else if (*compose_cmd) {
      const auto bundle = mesh::load_bundle(bundle_path);
      const auto a = read_activation(activation_arg);
      mesh::save_obj(mesh::compose(bundle.templ, bundle.bases, a).with_topology(
                         bundle.templ.has_topology() ? bundle.templ.triangles()
                                                     : mesh::grid_topology(bundle.vertex_count())),
                     out);
    } else if (*animate_cmd) {
      const auto bundle = mesh::load_bundle(bundle_path);
      const auto speech = mesh::load_offsets(speech_path);
      const auto& registry = facs::Registry::builtin();
      const auto a = registry.emotion_to_activation(emotion).scaled(static_cast<float>(intensity));
      registry.validate_activation(a);
      const auto expr = mesh::OffsetSequence::constant(mesh::expression_offsets(bundle.bases, a), speech.frame_rate());
      const auto frames = mesh::compose_animated(bundle.templ, speech, expr);
      const auto topo = mesh::grid_topology(bundle.vertex_count());
      fs::create_directories(out);
      for (std::size_t t = 0; t < frames.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.obj", t);
        mesh::save_obj(frames[t].with_topology(topo), fs::path(out) / name);
      }
      std::printf("%zu frames at %g fps -> %s\n", frames.size(), static_cast<double>(speech.frame_rate()),
                  out.c_str());
    } else if (*eval_cmd) {
      if (oracle == !models_path.empty()) throw ConfigError("eval: pass exactly one of --models or --oracle");
      const auto ds = synth::load_dataset(data);
      const auto bundles = select(ds, split);
      if (bundles.empty()) throw ConfigError("eval: split '" + split + "' is empty");
      std::optional<model::ModelPair> models;
      if (!oracle) models = model::load_models(models_path);
      const auto predictor = oracle ? train::oracle_predictor() : train::model_predictor(*models);
      const auto lip = synth::load_index_list(fs::path(data) / "lip_mask.txt");
      const auto upper = synth::load_index_list(fs::path(data) / "upper_mask.txt");
      const auto report = train::evaluate(predictor, bundles, lip, upper, seed);
      io::write_text(report_path, report.to_json());
      std::printf("MSE_S %.6g  MSE_M %.6g  LVE %.6g  V-LVE %.6g  FDD %.6g\n", report.mse_single, report.mse_multi,
                  report.animation.lve, report.animation.vlve, report.animation.fdd);
    } else if (*augment_cmd) {
      const auto ds = synth::load_dataset(data);
      train::BundleList all;
      for (const auto& b : ds.bundles) all.push_back(&b);
      const auto summary = synth::export_augmentation(all, per_identity, seed, out);
      std::printf("%zu samples -> %s (manifest %s)\n", summary.rows, out.c_str(), summary.manifest_hash.c_str());
    } else if (*serve_cmd) {
      service::Service svc(service::load_snapshot(data, models_path));
      service::HttpServer server(svc);
      server.run(host, port, [&](int bound) {
        std::printf("listening on http://%s:%d\n", host.c_str(), bound);
        std::fflush(stdout);
      });
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const LookupError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
