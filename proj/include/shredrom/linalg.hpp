#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace shredrom {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Throws NonFiniteError naming `what` when any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& a, std::string_view what);

struct SvdResult {
  Matrix u;  ///< rows x rank, orthonormal columns
  Vector s;  ///< nonincreasing, nonnegative
  Matrix v;  ///< cols x rank, orthonormal columns
};

struct RsvdOptions {
  Index oversample = 10;
  Index power_iters = 2;
};

/// Truncated SVD by a Gaussian range finder with power iteration. Each column
/// pair is sign-normalized so that the largest-magnitude entry of u is
/// positive; identical (a, seed) give bit-identical output.
SvdResult randomized_svd(const Matrix& a, Index rank, Index oversample,
                         Index power_iters, std::uint64_t seed);

/// Truncated spatial basis of a snapshot matrix (one snapshot per column).
struct PODBasis {
  Matrix modes;            ///< N_h x r
  Vector singular_values;  ///< length r

  Index rank() const noexcept { return modes.cols(); }
  Index state_dim() const noexcept { return modes.rows(); }
};

/// Plain (uncentered) POD. The oversample is reduced when the matrix is too
/// small to honour it.
PODBasis pod_fit(const Matrix& snapshots, Index rank, std::uint64_t seed,
                 const RsvdOptions& options = {});

/// Keeps the leading `rank` modes.
PODBasis pod_truncate(const PODBasis& basis, Index rank);

/// coeffs = modes^T u.
Vector pod_project(const PODBasis& basis, const Eigen::Ref<const Vector>& u);
/// Row-wise projection of states stored one per row (n x N_h -> n x r).
Matrix pod_project_rows(const PODBasis& basis, const Eigen::Ref<const Matrix>& states);

/// state = modes coeffs.
Vector pod_reconstruct(const PODBasis& basis, const Eigen::Ref<const Vector>& coeffs);
/// Row-wise reconstruction (n x r -> n x N_h).
Matrix pod_reconstruct_rows(const PODBasis& basis, const Eigen::Ref<const Matrix>& coeffs);

/// ||X - modes modes^T X||_F for snapshots stored one per column.
double pod_truncation_error(const PODBasis& basis, const Matrix& snapshots);

}  // namespace shredrom
