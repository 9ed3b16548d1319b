#include "shredrom/srd1.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "shredrom/error.hpp"

namespace shredrom {

namespace {

constexpr std::string_view kMagic = "SRD1";
constexpr std::uint8_t kFloat64 = 0;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("srd1: truncated ") + what + " at byte " + std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Tensor::element_count() const noexcept {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor Tensor::from_matrix(const Eigen::Ref<const Matrix>& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.data.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMatrix>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

Tensor Tensor::from_vector(const Eigen::Ref<const Vector>& v) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor Tensor::scalar(double value) {
  Tensor t;
  t.dims = {1};
  t.data = {value};
  return t;
}

Matrix Tensor::to_matrix() const {
  if (dims.size() != 2) throw FormatError("srd1: expected a 2-D tensor");
  return Eigen::Map<const RowMatrix>(data.data(), static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
}

Vector Tensor::to_vector() const {
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

void TensorFile::add(std::string name, Tensor tensor) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidArgument("srd1: tensor name length must be 1..65535");
  }
  if (contains(name)) throw InvalidArgument("srd1: duplicate tensor name '" + name + "'");
  if (tensor.dims.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw InvalidArgument("srd1: too many dimensions");
  }
  if (tensor.element_count() != tensor.data.size()) {
    throw DimensionError("srd1: tensor '" + name + "' payload does not match its dims");
  }
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool TensorFile::contains(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return true;
  }
  return false;
}

const Tensor& TensorFile::get(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw FormatError("srd1: missing tensor '" + std::string(name) + "'");
}

std::string TensorFile::encode() const {
  std::string out(kMagic);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, t] : entries_) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_le<std::uint8_t>(out, kFloat64);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put_le<std::uint64_t>(out, d);
    for (double v : t.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

TensorFile TensorFile::decode(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4, "magic") != kMagic) throw FormatError("srd1: bad magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) throw FormatError("srd1: unsupported version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>("tensor count");

  TensorFile file;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>("name length");
    std::string name(r.take(name_len, "name"));
    const auto dtype = r.get<std::uint8_t>("dtype");
    if (dtype != kFloat64) throw FormatError("srd1: tensor '" + name + "' has unknown dtype");
    const auto ndim = r.get<std::uint8_t>("ndim");
    Tensor t;
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      const auto dim = r.get<std::uint64_t>("dims");
      if (dim != 0 && n > std::numeric_limits<std::uint64_t>::max() / dim) {
        throw FormatError("srd1: dims of '" + name + "' overflow");
      }
      n *= dim;
      t.dims.push_back(dim);
    }
    if (n > r.remaining() / 8) throw FormatError("srd1: truncated payload of '" + name + "'");
    t.data.resize(static_cast<std::size_t>(n));
    for (auto& v : t.data) v = std::bit_cast<double>(r.get<std::uint64_t>("payload"));
    if (file.contains(name)) throw FormatError("srd1: duplicate tensor name '" + name + "'");
    file.entries_.emplace_back(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) throw FormatError("srd1: trailing bytes after last tensor");
  return file;
}

void TensorFile::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

TensorFile TensorFile::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace shredrom
