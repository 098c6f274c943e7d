#include "opno/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "opno/error.hpp"

namespace opno {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void get_bytes(void* out, std::size_t n, const char* what) {
    need(n, what);
    if (n) std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (n > remaining()) throw DataError(std::string("container truncated while reading ") + what);
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t NamedArray::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const NamedArray& Container::get(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw DataError("container has no array named '" + name + "'");
}

bool Container::contains(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return true;
  }
  return false;
}

void Container::add(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data) {
  NamedArray a{std::move(name), std::move(shape), std::move(data)};
  if (a.element_count() != a.data.size()) {
    throw InvalidArgument("array '" + a.name + "': shape does not match data length");
  }
  arrays.push_back(std::move(a));
}

std::vector<std::uint8_t> encode_container(const Container& c) {
  Writer w;
  w.put_bytes("OPNO", 4);
  w.put<std::uint32_t>(kContainerVersion);
  w.put<std::uint64_t>(c.arrays.size());
  for (const auto& a : c.arrays) {
    if (a.element_count() != a.data.size()) {
      throw InvalidArgument("array '" + a.name + "': shape does not match data length");
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(a.name.size()));
    w.put_bytes(a.name.data(), a.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) w.put<std::uint64_t>(d);
    w.put<std::uint32_t>(kElemFloat64);
    w.put_bytes(a.data.data(), a.data.size() * sizeof(double));
  }
  w.put<std::uint64_t>(c.metadata.size());
  w.put_bytes(c.metadata.data(), c.metadata.size());
  return w.take();
}

Container decode_container(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, 4, "magic");
  if (std::memcmp(magic, "OPNO", 4) != 0) throw DataError("not an OPNO container (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kContainerVersion) {
    throw DataError("unsupported container version " + std::to_string(version));
  }
  const auto count = r.get<std::uint64_t>("array count");
  Container c;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    const auto name_len = r.get<std::uint32_t>("name length");
    a.name.resize(name_len);
    r.get_bytes(a.name.data(), name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    std::uint64_t elements = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto dim = r.get<std::uint64_t>("dims");
      a.shape.push_back(dim);
      if (dim != 0 && elements > UINT64_MAX / dim) throw DataError("array dims overflow");
      elements *= dim;
    }
    const auto code = r.get<std::uint32_t>("element code");
    if (code != kElemFloat64) {
      throw DataError("array '" + a.name + "': unknown element code " + std::to_string(code));
    }
    if (elements > r.remaining() / sizeof(double)) {
      throw DataError("array '" + a.name + "': declared size exceeds file length");
    }
    a.data.resize(elements);
    r.get_bytes(a.data.data(), elements * sizeof(double), "array data");
    c.arrays.push_back(std::move(a));
  }
  const auto meta_len = r.get<std::uint64_t>("metadata length");
  if (meta_len > r.remaining()) throw DataError("container truncated while reading metadata");
  c.metadata.resize(meta_len);
  r.get_bytes(c.metadata.data(), meta_len, "metadata");
  if (r.remaining() != 0) throw DataError("trailing bytes after container metadata");
  return c;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  const auto bytes = encode_container(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace opno
