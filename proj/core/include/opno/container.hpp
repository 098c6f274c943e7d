#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace opno {

/// Binary container of named float64 arrays plus a JSON metadata blob.
///
/// Layout, all integers little-endian:
///   magic        4 bytes  "OPNO"
///   version      u32      (kContainerVersion)
///   array count  u64
///   per array:
///     name       u32 byte length + UTF-8 bytes
///     rank       u32
///     dims       rank x u64
///     elem code  u32      (1 = float64 IEEE little-endian)
///     data       prod(dims) x 8 bytes
///   metadata     u64 byte length + UTF-8 JSON text
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kElemFloat64 = 1;

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;

  std::uint64_t element_count() const;
};

struct Container {
  std::vector<NamedArray> arrays;
  std::string metadata = "{}";

  /// Throws DataError if absent.
  const NamedArray& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  void add(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data);
};

std::vector<std::uint8_t> encode_container(const Container& c);
/// Throws DataError on truncation, bad magic, unknown element codes or
/// inconsistent sizes.
Container decode_container(const std::vector<std::uint8_t>& bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

}  // namespace opno
