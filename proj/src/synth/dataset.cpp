#include "aublend/synth/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/io.hpp"
#include "json.hpp"

namespace aublend::synth {

using nlohmann::json;

SplitSizes split_sizes(std::size_t count) {
  constexpr std::size_t kWeights[3] = {8, 1, 1};
  std::size_t base[3];
  std::size_t rem[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    base[i] = count * kWeights[i] / 10;
    rem[i] = count * kWeights[i] % 10;
    assigned += base[i];
  }
  for (std::size_t left = count - assigned; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rem[i] > rem[best]) best = i;
    }
    ++base[best];
    rem[best] = 0;
  }
  return {base[0], base[1], base[2]};
}

const mesh::IdentityBundle& Dataset::bundle(const std::string& id) const {
  for (const auto& b : bundles) {
    if (b.identity_id == id) return b;
  }
  throw LookupError("unknown identity '" + id + "'");
}

std::vector<const mesh::IdentityBundle*> Dataset::select(const std::vector<std::string>& ids) const {
  std::vector<const mesh::IdentityBundle*> out;
  for (const auto& id : ids) out.push_back(&bundle(id));
  return out;
}

Dataset generate_dataset(std::size_t count, std::uint64_t seed, std::size_t vertex_count,
                         const DatasetOptions& options) {
  if (count < 10) throw ContractError("generate_dataset needs count >= 10, got " + std::to_string(count));
  const FaceLayout probe(vertex_count);  // fail fast on a bad V
  (void)probe;
  Dataset ds;
  ds.seed = seed;
  ds.vertex_count = vertex_count;
  ds.options = options;
  const SplitSizes sizes = split_sizes(count);

  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) ds.styles.push_back(sample_style(rng));
  if (options.interpolate_heldout) {
    Rng pick(Rng::derive(seed, 0x1e7));
    for (std::size_t i = sizes.train; i < count; ++i) {
      const auto a = static_cast<std::size_t>(pick.below(sizes.train));
      auto b = static_cast<std::size_t>(pick.below(sizes.train - 1));
      if (b >= a) ++b;
      const double t = pick.uniform(0.25, 0.75);
      ds.styles[i] = lerp(ds.styles[a], ds.styles[b], t, ds.styles[i].seed);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "identity-%03zu", i);
    GeneratorOptions gen;
    gen.pose_count = options.pose_count;
    gen.identity_id = name;
    ds.bundles.push_back(generate_identity(ds.styles[i], vertex_count, gen));
    auto& list = i < sizes.train ? ds.split.train : i < sizes.train + sizes.val ? ds.split.val : ds.split.test;
    list.push_back(name);
  }
  return ds;
}

namespace {

json style_json(const StyleParams& s) {
  json j;
  j["seed"] = s.seed;
  j["face_scale"] = s.face_scale;
  j["asymmetry"] = s.asymmetry;
  j["exaggeration"] = s.exaggeration;
  json gains = json::object();
  for (std::size_t z = 0; z < kZoneCount; ++z) gains[std::string(to_string(static_cast<Zone>(z)))] = s.region_gains[z];
  j["region_gains"] = gains;
  j["age_factor"] = s.age_factor;
  j["gender_factor"] = s.gender_factor;
  return j;
}

StyleParams style_from_json(const json& j) {
  StyleParams s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.face_scale = j.at("face_scale").get<std::array<double, 3>>();
  s.asymmetry = j.at("asymmetry").get<double>();
  s.exaggeration = j.at("exaggeration").get<double>();
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    s.region_gains[z] = j.at("region_gains").at(std::string(to_string(static_cast<Zone>(z)))).get<double>();
  }
  s.age_factor = j.at("age_factor").get<double>();
  s.gender_factor = j.at("gender_factor").get<double>();
  return s;
}

}  // namespace

void save_index_list(const std::vector<std::size_t>& indices, const std::filesystem::path& path) {
  std::string text;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    text += std::to_string(indices[i]);
    text += (i + 1) % 16 == 0 || i + 1 == indices.size() ? '\n' : ' ';
  }
  io::write_text(path, text);
}

std::vector<std::size_t> load_index_list(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::vector<std::size_t> out;
  std::string tok;
  while (in >> tok) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok.front() == '-') {
      throw FormatError("index list '" + path.string() + "': bad entry '" + tok + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  json doc;
  doc["format"] = "aublend-dataset";
  doc["version"] = 1;
  doc["seed"] = ds.seed;
  doc["vertex_count"] = ds.vertex_count;
  doc["pose_count"] = ds.options.pose_count;
  doc["interpolate_heldout"] = ds.options.interpolate_heldout;
  doc["split"] = {{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}};
  doc["identities"] = json::array();
  for (std::size_t i = 0; i < ds.bundles.size(); ++i) {
    const auto& b = ds.bundles[i];
    doc["identities"].push_back(
        {{"id", b.identity_id}, {"file", "identities/" + b.identity_id + ".aubd"}, {"style", style_json(ds.styles[i])}});
    mesh::save_bundle(b, dir / "identities" / (b.identity_id + ".aubd"));
  }
  io::write_text(dir / "dataset.json", doc.dump(2) + "\n");
  const FaceLayout layout(ds.vertex_count);
  save_index_list(layout.lip_indices(), dir / "lip_mask.txt");
  save_index_list(layout.upper_face_indices(), dir / "upper_mask.txt");
  io::write_text(dir / "manifest.txt", io::directory_manifest(dir, {"manifest.txt"}));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  json doc;
  try {
    doc = json::parse(io::read_text(dir / "dataset.json"));
  } catch (const json::parse_error& e) {
    throw FormatError("dataset.json: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    if (doc.at("version").get<int>() != 1) throw FormatError("dataset.json: unsupported version");
    ds.seed = doc.at("seed").get<std::uint64_t>();
    ds.vertex_count = doc.at("vertex_count").get<std::size_t>();
    ds.options.pose_count = doc.value("pose_count", std::size_t{8});
    ds.options.interpolate_heldout = doc.value("interpolate_heldout", false);
    ds.split.train = doc.at("split").at("train").get<std::vector<std::string>>();
    ds.split.val = doc.at("split").at("val").get<std::vector<std::string>>();
    ds.split.test = doc.at("split").at("test").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("identities")) {
      auto b = mesh::load_bundle(dir / entry.at("file").get<std::string>());
      if (b.identity_id != entry.at("id").get<std::string>()) {
        throw FormatError("dataset.json: identity id mismatch for " + entry.at("file").get<std::string>());
      }
      if (b.vertex_count() != ds.vertex_count) {
        throw FormatError("dataset.json: " + b.identity_id + " has " + std::to_string(b.vertex_count()) +
                          " vertices, expected " + std::to_string(ds.vertex_count));
      }
      ds.styles.push_back(style_from_json(entry.at("style")));
      ds.bundles.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError("dataset.json: " + std::string(e.what()));
  }
  for (const auto* list : {&ds.split.train, &ds.split.val, &ds.split.test}) {
    for (const auto& id : *list) {
      try {
        ds.bundle(id);
      } catch (const LookupError&) {
        throw FormatError("dataset.json: split names unknown identity '" + id + "'");
      }
    }
  }
  return ds;
}

}  // namespace aublend::synth
