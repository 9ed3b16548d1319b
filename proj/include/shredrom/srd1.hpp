#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shredrom/linalg.hpp"

namespace shredrom {

/// Dense float64 array with row-major payload.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t element_count() const noexcept;

  static Tensor from_matrix(const Eigen::Ref<const Matrix>& m);
  static Tensor from_vector(const Eigen::Ref<const Vector>& v);
  static Tensor scalar(double value);

  /// 2-D tensor as a matrix; throws FormatError for other ranks.
  Matrix to_matrix() const;
  /// Any tensor flattened in row-major order.
  Vector to_vector() const;

  bool operator==(const Tensor&) const = default;
};

/// Ordered set of uniquely named tensors: the SRD1 container.
///
/// Layout (little-endian): "SRD1", u32 version (=1), u32 count, then per
/// tensor u16 name length, UTF-8 name, u8 dtype (0 = float64), u8 ndim,
/// u64 dims[ndim], float64 payload[prod(dims)].
class TensorFile {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void add(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::string encode() const;
  static TensorFile decode(std::string_view bytes);

  void write(const std::filesystem::path& path) const;
  static TensorFile read(const std::filesystem::path& path);

  bool operator==(const TensorFile&) const = default;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace shredrom
