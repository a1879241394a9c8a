#include "aublend/service/server.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/compose.hpp"
#include "aublend/mesh/io.hpp"
#include "aublend/synth/dataset.hpp"
#include "aublend/synth/speech.hpp"
#include "httplib.h"
#include "json.hpp"

namespace aublend::service {

using nlohmann::json;

std::uint16_t default_port() {
  const char* env = std::getenv("AUBLEND_PORT");
  if (env == nullptr || *env == '\0') return kDefaultPort;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v <= 0 || v > 65535) return kDefaultPort;
  return static_cast<std::uint16_t>(v);
}

std::shared_ptr<const Snapshot> load_snapshot(const std::filesystem::path& data, const std::filesystem::path& models) {
  auto snap = std::make_shared<Snapshot>();
  synth::Dataset ds = synth::load_dataset(data);
  std::map<std::string, std::string> split_of;
  for (const auto& id : ds.split.train) split_of[id] = "train";
  for (const auto& id : ds.split.val) split_of[id] = "val";
  for (const auto& id : ds.split.test) split_of[id] = "test";
  for (std::size_t i = 0; i < ds.bundles.size(); ++i) {
    mesh::IdentityBundle b = std::move(ds.bundles[i]);
    const auto& s = ds.styles[i];
    b.style_meta["split"] = split_of[b.identity_id];
    b.style_meta["exaggeration"] = std::to_string(s.exaggeration);
    b.style_meta["asymmetry"] = std::to_string(s.asymmetry);
    b.style_meta["age_factor"] = std::to_string(s.age_factor);
    b.style_meta["gender_factor"] = std::to_string(s.gender_factor);
    const std::string id = b.identity_id;
    snap->bundles.emplace(id, std::move(b));
  }
  snap->speech.emplace("synthetic",
                       synth::synth_speech_offsets(synth::FaceLayout(ds.vertex_count), 60, 30.0f, ds.seed));
  const auto speech_dir = data / "speech";
  if (std::filesystem::is_directory(speech_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(speech_dir)) {
      if (entry.path().extension() != ".auos") continue;
      auto seq = mesh::load_offsets(entry.path());
      if (seq.vertex_count() != ds.vertex_count) {
        throw FormatError(entry.path().string() + ": vertex count " + std::to_string(seq.vertex_count()) +
                          " does not match dataset " + std::to_string(ds.vertex_count));
      }
      snap->speech.insert_or_assign(entry.path().stem().string(), std::move(seq));
    }
  }
  if (!models.empty()) snap->models = std::make_shared<const model::ModelPair>(model::load_models(models));
  return snap;
}

namespace {

// Carries an HTTP status through the handlers.
struct HttpError {
  int status;
  json body;
};

[[noreturn]] void fail(int status, const std::string& message) { throw HttpError{status, {{"error", message}}}; }

Response json_response(const json& j, int status = 200) {
  Response r;
  r.status = status;
  r.body = j.dump();
  return r;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) fail(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(400, std::string("malformed JSON: ") + e.what());
  }
}

std::string string_field(const json& j, const char* key, const std::string& fallback = {}) {
  if (!j.contains(key) || j[key].is_null()) {
    if (fallback.empty()) fail(400, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!j[key].is_string()) fail(400, std::string("field '") + key + "' must be a string");
  return j[key].get<std::string>();
}

json vertices_json(std::span<const float> v) {
  json arr = json::array();
  for (float x : v) arr.push_back(x);
  return arr;
}

json triangles_json(const mesh::FaceMesh& m) {
  const auto tris = m.has_topology() ? m.triangles() : mesh::grid_topology(m.vertex_count());
  json arr = json::array();
  for (const auto& t : tris) {
    arr.push_back(t[0]);
    arr.push_back(t[1]);
    arr.push_back(t[2]);
  }
  return arr;
}

json violations_json(const std::vector<facs::Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back({{"au", mesh::to_string(v.au)}, {"message", v.message}});
  return arr;
}

// Keys "AU12" or "12"; unparseable keys and non-numeric weights are
// reported like any other violation.
mesh::Activation parse_activations(const json& j, const facs::Registry& registry) {
  mesh::Activation a;
  std::vector<facs::Violation> bad;
  if (!j.is_null() && !j.is_object()) fail(400, "'activations' must be an object");
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      const auto id = mesh::parse_au_id(key);
      if (!id) {
        bad.push_back({mesh::AuId{0}, "'" + key + "' is not an AU id"});
        continue;
      }
      if (!value.is_number()) {
        bad.push_back({*id, mesh::to_string(*id) + " weight is not a number"});
        continue;
      }
      a.set(*id, value.get<float>());
    }
  }
  for (auto& v : registry.check_activation(a)) bad.push_back(std::move(v));
  if (!bad.empty()) throw HttpError{422, {{"error", "invalid activation"}, {"violations", violations_json(bad)}}};
  return a;
}

double max_displacement(const mesh::BlendDelta& d) {
  double best = 0.0;
  for (std::size_t i = 0; i + 2 < d.deltas.size(); i += 3) {
    const double n = std::sqrt(static_cast<double>(d.deltas[i]) * d.deltas[i] +
                               static_cast<double>(d.deltas[i + 1]) * d.deltas[i + 1] +
                               static_cast<double>(d.deltas[i + 2]) * d.deltas[i + 2]);
    best = std::max(best, n);
  }
  return best;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string::npos ? path.size() : j;
    if (end > i) parts.push_back(path.substr(i, end - i));
    i = end + 1;
  }
  return parts;
}

}  // namespace

struct Service::State {
  struct CacheEntry {
    std::once_flag once;
    std::atomic<bool> done{false};
    model::Prediction prediction;
  };

  std::shared_ptr<const Snapshot> snapshot;
  std::mutex cache_mutex;
  std::map<std::string, std::shared_ptr<CacheEntry>> cache;

  const mesh::IdentityBundle& bundle(const std::string& id) const {
    auto it = snapshot->bundles.find(id);
    if (it == snapshot->bundles.end()) fail(404, "unknown identity '" + id + "'");
    return it->second;
  }

  bool cached(const std::string& id) {
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(id);
    return it != cache.end() && it->second->done.load();
  }

  // Runs predict_basis at most once per identity per snapshot. A failed
  // run leaves the flag unset so a later request retries.
  const model::Prediction& predicted(const mesh::IdentityBundle& b, std::atomic<std::uint64_t>& runs) {
    if (!snapshot->models) fail(503, "model not loaded");
    std::shared_ptr<CacheEntry> entry;
    {
      std::lock_guard lock(cache_mutex);
      auto& slot = cache[b.identity_id];
      if (!slot) slot = std::make_shared<CacheEntry>();
      entry = slot;
    }
    std::call_once(entry->once, [&] {
      const auto& m = *snapshot->models;
      entry->prediction = model::predict_basis(m.style, m.codebook, b.templ, b.bases.ids());
      entry->done = true;
      ++runs;
    });
    return entry->prediction;
  }
};

Service::Service(std::shared_ptr<const Snapshot> snapshot, const facs::Registry& registry) : registry_(registry) {
  swap(std::move(snapshot));
}

void Service::swap(std::shared_ptr<const Snapshot> snapshot) {
  if (!snapshot) throw ContractError("service: null snapshot");
  auto state = std::make_shared<State>();
  state->snapshot = std::move(snapshot);
  std::lock_guard lock(mutex_);
  state_ = std::move(state);
}

std::shared_ptr<Service::State> Service::current() const {
  std::lock_guard lock(mutex_);
  return state_;
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  ++requests_;
  try {
    return route(method, path, body);
  } catch (const HttpError& e) {
    return json_response(e.body, e.status);
  } catch (const ValidationError& e) {
    return json_response({{"error", e.what()}}, 422);
  } catch (const LookupError& e) {
    return json_response({{"error", e.what()}}, 404);
  } catch (const std::exception& e) {
    return json_response({{"error", e.what()}}, 500);
  }
}

Response Service::route(const std::string& method, const std::string& path, const std::string& body) {
  const auto parts = split_path(path);
  if (parts.empty() || parts[0] != "api") fail(404, "no route for " + path);
  const auto state = current();
  const Snapshot& snap = *state->snapshot;

  auto require = [&](const char* m) {
    if (method != m) fail(405, "method " + method + " not allowed on " + path);
  };

  if (parts.size() == 2 && parts[1] == "aus") {
    require("GET");
    json arr = json::array();
    for (const auto& au : registry_.list_aus()) {
      arr.push_back({{"id", mesh::to_string(au.id)},
                     {"number", au.id.value},
                     {"name", au.name},
                     {"region", facs::to_string(au.region)},
                     {"notes", au.notes},
                     {"zones", au.zones}});
    }
    return json_response(arr);
  }

  if (parts.size() == 2 && parts[1] == "emotions") {
    require("GET");
    json arr = json::array();
    for (const auto& p : registry_.presets()) {
      json act = json::object();
      for (const auto& [id, w] : p.activation.weights()) act[mesh::to_string(id)] = w;
      arr.push_back({{"emotion", p.emotion}, {"activation", act}});
    }
    return json_response(arr);
  }

  if (parts.size() == 2 && parts[1] == "identities") {
    require("GET");
    json arr = json::array();
    for (const auto& [id, b] : snap.bundles) {
      arr.push_back({{"id", id},
                     {"vertex_count", b.vertex_count()},
                     {"pose_count", b.poses.size()},
                     {"predicted", state->cached(id)},
                     {"meta", b.style_meta}});
    }
    return json_response(arr);
  }

  if (parts.size() == 2 && parts[1] == "status") {
    require("GET");
    json speech = json::array();
    for (const auto& [id, s] : snap.speech) speech.push_back(id);
    return json_response({{"model_loaded", snap.models != nullptr},
                          {"identities", snap.bundles.size()},
                          {"speech_offsets", speech},
                          {"requests", requests_.load()},
                          {"prediction_runs", predictions_.load()}});
  }

  if (parts.size() == 4 && parts[1] == "identity" && parts[3] == "template") {
    require("GET");
    const auto& b = state->bundle(parts[2]);
    return json_response({{"identity_id", b.identity_id},
                          {"vertex_count", b.vertex_count()},
                          {"vertices", vertices_json(b.templ.positions())},
                          {"triangles", triangles_json(b.templ)}});
  }

  if (parts.size() == 4 && parts[1] == "identity" && parts[3] == "predict") {
    require("POST");
    const auto& b = state->bundle(parts[2]);
    const bool was_cached = snap.models && state->cached(b.identity_id);
    const auto& p = state->predicted(b, predictions_);
    json bases = json::array();
    for (std::size_t i = 0; i < p.bases.size(); ++i) {
      const auto& d = p.bases.deltas()[i];
      bases.push_back({{"au", mesh::to_string(d.au)}, {"max_displacement", max_displacement(d)},
                       {"codebook_index", p.indices[i]}});
    }
    return json_response({{"identity_id", b.identity_id}, {"cached", was_cached}, {"bases", bases}});
  }

  if (parts.size() == 2 && parts[1] == "compose") {
    require("POST");
    const json req = parse_body(body);
    const auto& b = state->bundle(string_field(req, "identity_id"));
    const std::string basis = string_field(req, "basis", "bundle");
    if (basis != "bundle" && basis != "predicted") fail(400, "basis must be 'bundle' or 'predicted'");
    const bool topology = req.value("include_topology", false);
    const mesh::Activation a = parse_activations(req.value("activations", json::object()), registry_);
    const mesh::BasisSet& bases = basis == "bundle" ? b.bases : state->predicted(b, predictions_).bases;
    const auto t0 = std::chrono::steady_clock::now();
    const mesh::FaceMesh out = mesh::compose(b.templ, bases, a);
    const auto micros =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count();
    json j = {{"identity_id", b.identity_id}, {"basis", basis}, {"vertex_count", out.vertex_count()},
              {"vertices", vertices_json(out.positions())}};
    if (topology) j["triangles"] = triangles_json(b.templ);
    // Timing travels in a header so identical requests get identical bodies.
    Response r = json_response(j);
    r.headers["Cache-Control"] = "no-store";
    r.headers["X-Compose-Micros"] = std::to_string(micros);
    return r;
  }

  if (parts.size() == 2 && parts[1] == "animate") {
    require("POST");
    const json req = parse_body(body);
    const auto& b = state->bundle(string_field(req, "identity_id"));
    const std::string emotion = string_field(req, "emotion");
    const std::string speech_id = string_field(req, "speech_offsets_id", "synthetic");
    const std::string basis = string_field(req, "basis", "bundle");
    if (basis != "bundle" && basis != "predicted") fail(400, "basis must be 'bundle' or 'predicted'");
    if (req.contains("intensity") && !req["intensity"].is_number()) fail(400, "intensity must be a number");
    const double intensity = req.value("intensity", 1.0);
    if (!(intensity >= 0.0 && intensity <= 1.0)) fail(422, "intensity must be within [0, 1]");
    mesh::Activation a;
    try {
      a = registry_.emotion_to_activation(emotion).scaled(static_cast<float>(intensity));
    } catch (const LookupError& e) {
      fail(422, e.what());
    }
    auto sp = snap.speech.find(speech_id);
    if (sp == snap.speech.end()) fail(404, "unknown speech_offsets_id '" + speech_id + "'");
    const auto& speech = sp->second;
    if (speech.vertex_count() != b.vertex_count()) fail(422, "speech offsets vertex count does not match identity");
    const mesh::BasisSet& bases = basis == "bundle" ? b.bases : state->predicted(b, predictions_).bases;
    const auto expr = mesh::OffsetSequence::constant(mesh::expression_offsets(bases, a), speech.frame_rate());
    const auto frames = mesh::compose_animated(b.templ, speech, expr);
    json fr = json::array();
    for (const auto& f : frames) fr.push_back(vertices_json(f.positions()));
    std::ostringstream key;
    key << b.identity_id << '|' << emotion << '|' << intensity << '|' << speech_id << '|' << basis;
    return json_response({{"handle", "anim-" + io::fingerprint(key.str())},
                          {"identity_id", b.identity_id},
                          {"frame_count", frames.size()},
                          {"frame_rate", speech.frame_rate()},
                          {"vertex_count", b.vertex_count()},
                          {"frames", fr}});
  }

  fail(404, "no route for " + method + " " + path);
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Service& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const Response r = service.handle(req.method, req.path, req.body);
      res.status = r.status;
      for (const auto& [k, v] : r.headers) res.set_header(k, v);
      res.set_content(r.body, r.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
  }

  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = impl_->bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port, const std::function<void(int)>& on_bound) {
  const int bound = impl_->bind(host, port);
  if (on_bound) on_bound(bound);
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace aublend::service
