#include "aublend/facs/registry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"
#include "aublend/mesh/io.hpp"
#include "json.hpp"

namespace aublend::facs {

namespace detail {
extern const std::string_view kEmbeddedRegistry;
}

using nlohmann::json;

std::string to_string(FaceRegion region) { return region == FaceRegion::upper ? "upper" : "lower"; }

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void malformed(const std::string& what) { throw FormatError("facs registry: " + what); }

}  // namespace

Registry Registry::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  Registry reg;
  try {
    if (doc.at("version").get<int>() != 1) malformed("unsupported version");
    reg.lattice_ = doc.value("lattice", 9);
    if (reg.lattice_ < 2) malformed("lattice must be >= 2");
    for (const auto& a : doc.at("aus")) {
      AUDescriptor d;
      const int id = a.at("id").get<int>();
      if (id <= 0 || id > 0xffff) malformed("AU id out of range: " + std::to_string(id));
      d.id = mesh::AuId{static_cast<std::uint16_t>(id)};
      d.name = a.at("name").get<std::string>();
      const auto region = a.at("region").get<std::string>();
      if (region == "upper") {
        d.region = FaceRegion::upper;
      } else if (region == "lower") {
        d.region = FaceRegion::lower;
      } else {
        malformed("AU" + std::to_string(id) + ": region must be upper or lower");
      }
      d.notes = a.value("notes", "");
      d.zones = a.at("zones").get<std::vector<std::string>>();
      if (d.zones.empty()) malformed("AU" + std::to_string(id) + ": no zones");
      for (const auto& z : d.zones) {
        if (std::find(kZoneNames.begin(), kZoneNames.end(), z) == kZoneNames.end()) {
          malformed("AU" + std::to_string(id) + ": unknown zone '" + z + "'");
        }
      }
      for (const auto& m : a.at("motion")) {
        MotionControl c;
        const auto at = m.at("at").get<std::vector<double>>();
        const auto disp = m.at("d").get<std::vector<double>>();
        if (at.size() != 2 || disp.size() != 3) malformed("AU" + std::to_string(id) + ": motion needs at[2], d[3]");
        c.col = at[0];
        c.row = at[1];
        c.displacement = {disp[0], disp[1], disp[2]};
        c.radius = m.value("radius", 0.8);
        c.mirror = m.value("mirror", false);
        if (!(c.radius > 0.0)) malformed("AU" + std::to_string(id) + ": radius must be positive");
        d.motion.push_back(c);
      }
      if (d.motion.empty()) malformed("AU" + std::to_string(id) + ": no motion controls");
      reg.aus_.push_back(std::move(d));
    }
    std::sort(reg.aus_.begin(), reg.aus_.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    for (std::size_t i = 1; i < reg.aus_.size(); ++i) {
      if (reg.aus_[i].id == reg.aus_[i - 1].id) malformed("duplicate " + mesh::to_string(reg.aus_[i].id));
    }
    if (reg.aus_.size() != mesh::kBasisCount) {
      malformed("expected 32 AUs, found " + std::to_string(reg.aus_.size()));
    }
    std::set<std::string> seen;
    for (const auto& e : doc.at("emotions")) {
      EmotionPreset p;
      p.emotion = lower(e.at("name").get<std::string>());
      if (std::find(kEmotionNames.begin(), kEmotionNames.end(), p.emotion) == kEmotionNames.end()) {
        malformed("unknown emotion '" + p.emotion + "'");
      }
      if (!seen.insert(p.emotion).second) malformed("duplicate emotion '" + p.emotion + "'");
      for (const auto& [key, value] : e.at("aus").items()) {
        auto id = mesh::parse_au_id(key);
        if (!id) malformed("emotion " + p.emotion + ": bad AU key '" + key + "'");
        p.activation.set(*id, value.get<float>());
      }
      if (p.activation.empty()) malformed("emotion " + p.emotion + " lists no AUs");
      reg.presets_.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (reg.presets_.size() != kEmotionNames.size()) malformed("expected 7 emotion presets");
  for (const auto& p : reg.presets_) {
    auto v = reg.check_activation(p.activation);
    if (!v.empty()) malformed("emotion " + p.emotion + ": " + format_violations(v));
  }
  return reg;
}

Registry Registry::load(const std::filesystem::path& path) { return parse(io::read_text(path)); }

const Registry& Registry::builtin() {
  static const Registry reg = [] {
    if (const char* override_path = std::getenv("AUBLEND_FACS"); override_path && *override_path) {
      return load(override_path);
    }
    return parse(detail::kEmbeddedRegistry);
  }();
  return reg;
}

std::string Registry::serialize() const {
  json doc;
  doc["version"] = 1;
  doc["lattice"] = lattice_;
  doc["aus"] = json::array();
  for (const auto& d : aus_) {
    json a;
    a["id"] = d.id.value;
    a["name"] = d.name;
    a["region"] = to_string(d.region);
    a["zones"] = d.zones;
    a["notes"] = d.notes;
    a["motion"] = json::array();
    for (const auto& c : d.motion) {
      json m;
      m["at"] = {c.col, c.row};
      m["d"] = {c.displacement[0], c.displacement[1], c.displacement[2]};
      m["radius"] = c.radius;
      if (c.mirror) m["mirror"] = true;
      a["motion"].push_back(m);
    }
    doc["aus"].push_back(a);
  }
  doc["emotions"] = json::array();
  for (const auto& p : presets_) {
    json e;
    e["name"] = p.emotion;
    e["aus"] = json::object();
    for (auto [id, w] : p.activation.weights()) e["aus"][mesh::to_string(id)] = w;
    doc["emotions"].push_back(e);
  }
  return doc.dump(2) + "\n";
}

std::vector<mesh::AuId> Registry::ids() const {
  std::vector<mesh::AuId> out;
  for (const auto& d : aus_) out.push_back(d.id);
  return out;
}

const AUDescriptor* Registry::find(mesh::AuId id) const {
  auto it = std::lower_bound(aus_.begin(), aus_.end(), id, [](const auto& d, mesh::AuId k) { return d.id < k; });
  return it != aus_.end() && it->id == id ? &*it : nullptr;
}

std::size_t Registry::index_of(mesh::AuId id) const {
  const auto* d = find(id);
  if (!d) throw ValidationError("unregistered " + mesh::to_string(id));
  return static_cast<std::size_t>(d - aus_.data());
}

mesh::Activation Registry::emotion_to_activation(std::string_view emotion) const {
  const auto key = lower(emotion);
  for (const auto& p : presets_) {
    if (p.emotion == key) return p.activation;
  }
  std::string valid;
  for (const auto& p : presets_) valid += (valid.empty() ? "" : ", ") + p.emotion;
  throw LookupError("unknown emotion '" + std::string(emotion) + "'; valid: " + valid);
}

std::vector<Violation> Registry::check_activation(const mesh::Activation& a) const {
  std::vector<Violation> out;
  for (auto [id, w] : a.weights()) {
    if (!find(id)) out.push_back({id, mesh::to_string(id) + " is not a registered AU"});
    if (!(w >= 0.0f && w <= 1.0f)) {
      out.push_back({id, mesh::to_string(id) + " weight " + std::to_string(w) + " outside [0, 1]"});
    }
  }
  return out;
}

void Registry::validate_activation(const mesh::Activation& a) const {
  auto v = check_activation(a);
  if (!v.empty()) throw ValidationError("invalid activation: " + format_violations(v));
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) out += (out.empty() ? "" : "; ") + v.message;
  return out;
}

}  // namespace aublend::facs
