#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "aublend/facs/registry.hpp"
#include "aublend/mesh/mesh.hpp"
#include "aublend/rng.hpp"

namespace fixtures {

inline std::vector<float> random_floats(aublend::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline aublend::mesh::FaceMesh random_mesh(aublend::Rng& rng, std::size_t vertices) {
  return aublend::mesh::FaceMesh(random_floats(rng, 3 * vertices));
}

// 32 random deltas keyed by the registry AUs.
inline aublend::mesh::BasisSet random_bases(aublend::Rng& rng, std::size_t vertices, double amp = 0.1) {
  std::vector<aublend::mesh::BlendDelta> deltas;
  for (auto id : aublend::facs::Registry::builtin().ids()) deltas.push_back({id, random_floats(rng, 3 * vertices, -amp, amp)});
  return aublend::mesh::BasisSet(std::move(deltas), vertices);
}

inline aublend::mesh::Activation random_activation(aublend::Rng& rng, std::size_t active) {
  const auto ids = aublend::facs::Registry::builtin().ids();
  aublend::mesh::Activation a;
  for (std::size_t k = 0; k < active; ++k) a.set(ids[rng.below(ids.size())], static_cast<float>(rng.uniform(0.0, 1.0)));
  return a;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("aublend-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
