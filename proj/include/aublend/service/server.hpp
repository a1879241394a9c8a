#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "aublend/facs/registry.hpp"
#include "aublend/mesh/mesh.hpp"
#include "aublend/model/checkpoint.hpp"

namespace aublend::service {

inline constexpr std::uint16_t kDefaultPort = 8080;

// $AUBLEND_PORT when set and valid, kDefaultPort otherwise.
std::uint16_t default_port();

// Everything a request may read. Immutable once published; a reload
// builds a new one and swaps the pointer.
struct Snapshot {
  std::shared_ptr<const model::ModelPair> models;  // null: prediction disabled
  std::map<std::string, mesh::IdentityBundle> bundles;
  std::map<std::string, mesh::OffsetSequence> speech;  // by speech_offsets_id
};

// Loads <data>/dataset.json bundles (with style tags and split membership
// in style_meta), every <data>/speech/*.auos, and a procedural "synthetic"
// speech track. `models` may be empty.
std::shared_ptr<const Snapshot> load_snapshot(const std::filesystem::path& data, const std::filesystem::path& models);

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

// Transport-independent request handling. Safe to call from many threads.
class Service {
 public:
  explicit Service(std::shared_ptr<const Snapshot> snapshot,
                   const facs::Registry& registry = facs::Registry::builtin());

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  // Publishes a new snapshot. In-flight requests finish on the old one;
  // the prediction cache belongs to the snapshot and starts empty.
  void swap(std::shared_ptr<const Snapshot> snapshot);

  std::uint64_t request_count() const { return requests_.load(); }
  // Number of predict_basis runs since construction.
  std::uint64_t prediction_runs() const { return predictions_.load(); }

  struct State;

 private:
  std::shared_ptr<State> current() const;
  Response route(const std::string& method, const std::string& path, const std::string& body);

  const facs::Registry& registry_;
  mutable std::mutex mutex_;
  std::shared_ptr<State> state_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> predictions_{0};
};

// cpp-httplib front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; RuntimeError-style Error if binding fails.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop() is called from elsewhere.
  void run(const std::string& host, int port, const std::function<void(int)>& on_bound = {});
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace aublend::service
