#include "aublend/binary_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "aublend/error.hpp"

namespace aublend::io {

void ByteWriter::magic(std::string_view four_cc) {
  bytes_.insert(bytes_.end(), four_cc.begin(), four_cc.end());
}

void ByteWriter::u16(std::uint16_t v) {
  bytes_.push_back(static_cast<std::uint8_t>(v & 0xff));
  bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f32s(std::span<const float> values) {
  bytes_.reserve(bytes_.size() + 4 * values.size());
  for (float v : values) f32(v);
}

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteWriter::crc() { u32(crc32(bytes_)); }

void ByteReader::need(std::size_t n, std::string_view field) const {
  if (bytes_.size() - pos_ < n) {
    throw FormatError(format_ + ": truncated payload while reading '" + std::string(field) + "'");
  }
}

void ByteReader::expect_magic(std::string_view four_cc) {
  need(four_cc.size(), "magic");
  if (std::memcmp(bytes_.data() + pos_, four_cc.data(), four_cc.size()) != 0) {
    throw FormatError(format_ + ": bad magic, expected '" + std::string(four_cc) + "'");
  }
  pos_ += four_cc.size();
}

std::uint16_t ByteReader::u16(std::string_view field) {
  need(2, field);
  std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32(std::string_view field) {
  need(4, field);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

float ByteReader::f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }

std::vector<float> ByteReader::f32s(std::size_t count, std::string_view field) {
  need(4 * count, field);
  std::vector<float> out(count);
  for (auto& v : out) v = f32(field);
  return out;
}

std::string ByteReader::str(std::string_view field) {
  const std::uint32_t n = u32(field);
  need(n, field);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::verify_crc() {
  const std::size_t payload_end = pos_;
  const std::uint32_t stored = u32("crc32");
  const std::uint32_t actual = crc32(bytes_.subspan(0, payload_end));
  if (stored != actual) throw FormatError(format_ + ": crc32 mismatch");
  expect_end();
}

void ByteReader::expect_end() {
  if (pos_ != bytes_.size()) {
    throw FormatError(format_ + ": " + std::to_string(bytes_.size() - pos_) + " trailing bytes");
  }
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; chunk to stay portable for large buffers.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    c = ::crc32(c, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(c);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string fingerprint(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string fingerprint(std::string_view text) {
  return fingerprint(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string directory_manifest(const std::filesystem::path& dir, const std::vector<std::string>& exclude) {
  std::vector<std::string> rel;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = std::filesystem::relative(entry.path(), dir).generic_string();
    if (std::find(exclude.begin(), exclude.end(), name) != exclude.end()) continue;
    rel.push_back(std::move(name));
  }
  std::sort(rel.begin(), rel.end());
  std::string out;
  for (const auto& r : rel) out += fingerprint(read_file(dir / r)) + "  " + r + "\n";
  return out;
}

}  // namespace aublend::io
