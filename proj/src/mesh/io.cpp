#include "aublend/mesh/io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"

namespace aublend::mesh {

FaceMesh parse_obj(std::string_view text) {
  std::vector<float> positions;
  std::vector<Triangle> triangles;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      float x, y, z;
      if (!(ls >> x >> y >> z)) throw FormatError("obj line " + std::to_string(lineno) + ": malformed vertex");
      positions.insert(positions.end(), {x, y, z});
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        long v = 0;
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
        if (ec != std::errc() || ptr != head.data() + head.size() || v < 1) {
          throw FormatError("obj line " + std::to_string(lineno) + ": bad face index '" + tok + "'");
        }
        idx.push_back(static_cast<std::uint32_t>(v - 1));
      }
      if (idx.size() < 3) throw FormatError("obj line " + std::to_string(lineno) + ": face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  if (positions.empty()) throw FormatError("obj: no vertices");
  try {
    return FaceMesh(std::move(positions), std::move(triangles));
  } catch (const ValidationError& e) {
    throw FormatError(std::string("obj: ") + e.what());
  }
}

std::string format_obj(const FaceMesh& mesh) {
  std::string out;
  char buf[96];
  auto p = mesh.positions();
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p[3 * i], p[3 * i + 1], p[3 * i + 2]);
    out += buf;
  }
  for (const auto& t : mesh.triangles()) {
    std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

FaceMesh load_obj(const std::filesystem::path& path) { return parse_obj(io::read_text(path)); }

void save_obj(const FaceMesh& mesh, const std::filesystem::path& path) { io::write_text(path, format_obj(mesh)); }

std::vector<std::uint8_t> encode_bundle(const IdentityBundle& bundle) {
  const std::size_t v = bundle.vertex_count();
  if (bundle.bases.size() != kBasisCount) {
    throw ValidationError("expected 32 AU bases, got " + std::to_string(bundle.bases.size()));
  }
  if (bundle.bases.vertex_count() != v) throw ValidationError("bundle bases/template vertex count mismatch");
  io::ByteWriter w;
  w.magic("AUBD");
  w.u32(kBundleVersion);
  w.u32(static_cast<std::uint32_t>(v));
  w.u32(static_cast<std::uint32_t>(bundle.bases.size()));
  w.u32(static_cast<std::uint32_t>(bundle.poses.size()));
  w.str(bundle.identity_id);
  w.f32s(bundle.templ.positions());
  for (const auto& d : bundle.bases.deltas()) {
    w.u16(d.au.value);
    w.f32s(d.deltas);
  }
  for (const auto& pose : bundle.poses) {
    if (pose.mesh.vertex_count() != v) throw ValidationError("pose mesh vertex count mismatch");
    for (const auto& [id, weight] : pose.activation.weights()) {
      if (!bundle.bases.find(id)) throw ValidationError("pose activation uses " + to_string(id) + " not in bases");
      (void)weight;
    }
    for (const auto& d : bundle.bases.deltas()) w.f32(pose.activation.get(d.au));
    w.f32s(pose.mesh.positions());
  }
  w.crc();
  return w.bytes();
}

IdentityBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "bundle");
  r.expect_magic("AUBD");
  const auto version = r.u32("version");
  if (version != kBundleVersion) {
    throw FormatError("bundle: unsupported version " + std::to_string(version) + ", expected " +
                      std::to_string(kBundleVersion));
  }
  const std::size_t v = r.u32("vertex_count");
  const std::size_t n = r.u32("basis_count");
  const std::size_t pose_count = r.u32("pose_count");
  if (v == 0) throw FormatError("bundle: vertex_count is zero");
  if (n != kBasisCount) throw FormatError("bundle: basis_count " + std::to_string(n) + ", expected 32 AU bases");
  IdentityBundle b;
  b.identity_id = r.str("identity_id");
  try {
    b.templ = FaceMesh(r.f32s(3 * v, "template"));
    std::vector<BlendDelta> deltas;
    for (std::size_t i = 0; i < n; ++i) {
      AuId id{r.u16("au_id")};
      deltas.push_back({id, r.f32s(3 * v, "basis deltas")});
    }
    std::vector<AuId> order;
    for (const auto& d : deltas) order.push_back(d.au);
    b.bases = BasisSet(std::move(deltas), v);
    if (b.bases.ids() != order) throw FormatError("bundle: basis records not sorted by AU id");
    for (std::size_t p = 0; p < pose_count; ++p) {
      AnnotatedPose pose;
      for (std::size_t i = 0; i < n; ++i) {
        const float wgt = r.f32("pose activation");
        if (wgt != 0.0f) pose.activation.set(order[i], wgt);
      }
      pose.mesh = FaceMesh(r.f32s(3 * v, "pose positions"));
      b.poses.push_back(std::move(pose));
    }
  } catch (const ValidationError& e) {
    throw FormatError(std::string("bundle: ") + e.what());
  }
  r.verify_crc();
  return b;
}

IdentityBundle load_bundle(const std::filesystem::path& path) {
  try {
    return decode_bundle(io::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_bundle(const IdentityBundle& bundle, const std::filesystem::path& path) {
  io::write_file(path, encode_bundle(bundle));
}

std::vector<std::uint8_t> encode_poses(const std::vector<AuId>& au_order, const std::vector<AnnotatedPose>& poses,
                                       std::size_t vertex_count) {
  io::ByteWriter w;
  w.magic("AUPS");
  w.u32(kBundleVersion);
  w.u32(static_cast<std::uint32_t>(vertex_count));
  w.u32(static_cast<std::uint32_t>(au_order.size()));
  w.u32(static_cast<std::uint32_t>(poses.size()));
  for (auto id : au_order) w.u16(id.value);
  for (const auto& pose : poses) {
    if (pose.mesh.vertex_count() != vertex_count) throw ValidationError("pose mesh vertex count mismatch");
    for (auto id : au_order) w.f32(pose.activation.get(id));
    w.f32s(pose.mesh.positions());
  }
  w.crc();
  return w.bytes();
}

std::vector<AnnotatedPose> decode_poses(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "poses");
  r.expect_magic("AUPS");
  const auto version = r.u32("version");
  if (version != kBundleVersion) throw FormatError("poses: unsupported version " + std::to_string(version));
  const std::size_t v = r.u32("vertex_count");
  const std::size_t n = r.u32("au_count");
  const std::size_t count = r.u32("pose_count");
  std::vector<AuId> order;
  for (std::size_t i = 0; i < n; ++i) order.push_back(AuId{r.u16("au_id")});
  std::vector<AnnotatedPose> poses;
  try {
    for (std::size_t p = 0; p < count; ++p) {
      AnnotatedPose pose;
      for (std::size_t i = 0; i < n; ++i) {
        const float wgt = r.f32("pose activation");
        if (wgt != 0.0f) pose.activation.set(order[i], wgt);
      }
      pose.mesh = FaceMesh(r.f32s(3 * v, "pose positions"));
      poses.push_back(std::move(pose));
    }
  } catch (const ValidationError& e) {
    throw FormatError(std::string("poses: ") + e.what());
  }
  r.verify_crc();
  return poses;
}

std::vector<std::uint8_t> encode_offsets(const OffsetSequence& seq) {
  io::ByteWriter w;
  w.magic("AUOS");
  w.u32(static_cast<std::uint32_t>(seq.frames()));
  w.u32(static_cast<std::uint32_t>(seq.vertex_count()));
  w.f32(seq.frame_rate());
  w.f32s(seq.data());
  return w.bytes();
}

OffsetSequence decode_offsets(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "offsets");
  r.expect_magic("AUOS");
  const std::size_t t = r.u32("frame_count");
  const std::size_t v = r.u32("vertex_count");
  const float rate = r.f32("frame_rate");
  if (t == 0 || v == 0) throw FormatError("offsets: frame_count and vertex_count must be positive");
  auto data = r.f32s(t * 3 * v, "frame data");
  r.expect_end();
  try {
    return OffsetSequence(t, v, rate, std::move(data));
  } catch (const ValidationError& e) {
    throw FormatError(std::string("offsets: ") + e.what());
  }
}

OffsetSequence load_offsets(const std::filesystem::path& path) {
  try {
    return decode_offsets(io::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_offsets(const OffsetSequence& seq, const std::filesystem::path& path) {
  io::write_file(path, encode_offsets(seq));
}

}  // namespace aublend::mesh
