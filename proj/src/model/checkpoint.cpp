#include "aublend/model/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aublend/binary_io.hpp"
#include "aublend/error.hpp"

namespace aublend::model {

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  io::ByteWriter w;
  w.magic("AUBM");
  w.u32(kCheckpointVersion);
  w.str(ckpt.kind);
  w.str(to_json(ckpt.hp));
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.shape().size()));
    for (auto e : t.shape()) w.u32(static_cast<std::uint32_t>(e));
    std::vector<float> payload(t.values().begin(), t.values().end());
    w.f32s(payload);
  }
  w.crc();
  return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "checkpoint");
  r.expect_magic("AUBM");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.kind = r.str("kind");
  c.hp = hyper_from_json(r.str("hyperparameters"));
  const auto count = r.u32("tensor_count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str("tensor name");
    const auto rank = r.u32("rank of " + name);
    if (rank == 0 || rank > 4) throw FormatError("checkpoint: tensor " + name + " has rank " + std::to_string(rank));
    ad::Shape shape;
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      shape.push_back(r.u32("extent of " + name));
      if (shape.back() == 0) throw FormatError("checkpoint: tensor " + name + " has a zero extent");
      n *= shape.back();
      if (n > r.remaining()) throw FormatError("checkpoint: truncated payload while reading '" + name + "'");
    }
    const auto payload = r.f32s(n, name);
    std::vector<double> values(payload.begin(), payload.end());
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
      throw FormatError("checkpoint: tensor " + name + " holds non-finite values");
    }
    c.tensors.push_back({std::move(name), ad::Tensor(std::move(shape), std::move(values))});
  }
  r.verify_crc();
  return c;
}

void assign_tensors(const ad::ParamList& targets, const Checkpoint& ckpt, const std::string& prefix) {
  std::set<std::string> used;
  for (const auto& [name, target] : targets) {
    const std::string full = prefix + name;
    auto it = std::find_if(ckpt.tensors.begin(), ckpt.tensors.end(), [&](const auto& t) { return t.name == full; });
    if (it == ckpt.tensors.end()) throw FormatError("checkpoint: missing tensor '" + full + "'");
    if (it->tensor.shape() != target.shape()) {
      throw FormatError("checkpoint: tensor '" + full + "' has shape " + ad::to_string(it->tensor.shape()) +
                        ", model expects " + ad::to_string(target.shape()));
    }
    ad::Tensor dst = target;
    std::copy(it->tensor.values().begin(), it->tensor.values().end(), dst.data().begin());
    used.insert(full);
  }
  for (const auto& t : ckpt.tensors) {
    if (t.name.rfind(prefix, 0) == 0 && !used.count(t.name)) {
      throw FormatError("checkpoint: unexpected tensor '" + t.name + "'");
    }
  }
}

namespace {

ad::ParamList prefixed(const ad::ParamList& list, const std::string& prefix) {
  ad::ParamList out;
  for (const auto& p : list) out.push_back({prefix + p.name, p.tensor});
  return out;
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const std::string& kind) {
  Checkpoint c = decode_checkpoint(io::read_file(path));
  if (c.kind != kind) {
    throw FormatError("'" + path.string() + "' is a " + c.kind + " checkpoint, expected " + kind);
  }
  return c;
}

}  // namespace

CodebookModel codebook_from(const Checkpoint& ckpt) {
  try {
    validate(ckpt.hp);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  CodebookModel m = CodebookModel::init(ckpt.hp, 0);
  assign_tensors(m.params(), ckpt, "codebook.");
  return m;
}

void save_codebook(const CodebookModel& m, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint({"codebook", m.hp, prefixed(m.params(), "codebook.")}));
}

CodebookModel load_codebook(const std::filesystem::path& path) { return codebook_from(read_checkpoint(path, "codebook")); }

void save_models(const ModelPair& pair, const std::filesystem::path& path) {
  auto tensors = prefixed(pair.codebook.params(), "codebook.");
  for (auto& p : prefixed(pair.style.params(), "style.")) tensors.push_back(std::move(p));
  for (auto& p : prefixed(pair.style.buffers(), "style.")) tensors.push_back(std::move(p));
  io::write_file(path, encode_checkpoint({"styleblend", pair.style.hp, std::move(tensors)}));
}

ModelPair load_models(const std::filesystem::path& path) {
  const Checkpoint c = read_checkpoint(path, "styleblend");
  ModelPair pair{codebook_from(c), StyleBlendModel::init(c.hp, 0)};
  auto style = pair.style.params();
  for (auto& b : pair.style.buffers()) style.push_back(b);
  assign_tensors(style, c, "style.");
  return pair;
}

}  // namespace aublend::model
