#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aublend::io {

// Little-endian byte sink used by every binary format in the project.
class ByteWriter {
 public:
  void magic(std::string_view four_cc);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f32s(std::span<const float> values);
  void str(std::string_view s);  // u32 length + UTF-8 bytes

  // Appends CRC32 of everything written so far.
  void crc();

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader. Every read names the field so a
// truncated payload reports what was being parsed.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string format)
      : bytes_(bytes), format_(std::move(format)) {}

  void expect_magic(std::string_view four_cc);
  std::uint16_t u16(std::string_view field);
  std::uint32_t u32(std::string_view field);
  float f32(std::string_view field);
  std::vector<float> f32s(std::size_t count, std::string_view field);
  std::string str(std::string_view field);

  // Verifies the trailing CRC32 over all preceding bytes; must be last.
  void verify_crc();
  void expect_end();

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view field) const;

  std::span<const std::uint8_t> bytes_;
  std::string format_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

// Hex FNV-1a 64 digest; used for manifest / artifact fingerprints.
std::string fingerprint(std::span<const std::uint8_t> bytes);
std::string fingerprint(std::string_view text);

// "<fingerprint>  <relative path>" per regular file under `dir`, sorted by
// path. Files whose relative path is listed in `exclude` are skipped.
std::string directory_manifest(const std::filesystem::path& dir, const std::vector<std::string>& exclude = {});

}  // namespace aublend::io
