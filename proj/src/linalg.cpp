#include "shredrom/linalg.hpp"

#include <algorithm>
#include <string>

#include "shredrom/error.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

namespace {

// Thin orthonormal basis of range(y) via Householder QR.
Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

}  // namespace

void require_finite(const Eigen::Ref<const Matrix>& a, std::string_view what) {
  if (!a.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entry");
  }
}

SvdResult randomized_svd(const Matrix& a, Index rank, Index oversample,
                         Index power_iters, std::uint64_t seed) {
  if (rank < 1) throw InvalidArgument("randomized_svd: rank must be >= 1");
  if (oversample < 0 || power_iters < 0) {
    throw InvalidArgument("randomized_svd: oversample and power_iters must be >= 0");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  const Index sketch = rank + oversample;
  if (m == 0 || n == 0) throw DimensionError("randomized_svd: empty matrix");
  if (sketch > std::min(m, n)) {
    throw DimensionError("randomized_svd: rank + oversample = " +
                         std::to_string(sketch) + " exceeds min(rows, cols) = " +
                         std::to_string(std::min(m, n)));
  }
  require_finite(a, "randomized_svd");

  SplitMix64 rng(seed);
  Matrix test(n, sketch);
  for (Index j = 0; j < sketch; ++j) {
    for (Index i = 0; i < n; ++i) test(i, j) = rng.normal();
  }

  Matrix q = orthonormal_basis(a * test);
  for (Index it = 0; it < power_iters; ++it) {
    const Matrix z = orthonormal_basis(a.transpose() * q);
    q = orthonormal_basis(a * z);
  }

  // a ~ q (q^T a); the small factor carries the spectrum.
  const Matrix b = q.transpose() * a;
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult out;
  out.u = q * svd.matrixU().leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);

  for (Index j = 0; j < rank; ++j) {
    Index pivot = 0;
    out.u.col(j).cwiseAbs().maxCoeff(&pivot);
    if (out.u(pivot, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

PODBasis pod_fit(const Matrix& snapshots, Index rank, std::uint64_t seed,
                 const RsvdOptions& options) {
  const Index min_dim = std::min(snapshots.rows(), snapshots.cols());
  if (rank < 1 || rank > min_dim) {
    throw DimensionError("pod_fit: rank " + std::to_string(rank) +
                         " outside [1, " + std::to_string(min_dim) + "]");
  }
  const Index oversample = std::min(options.oversample, min_dim - rank);
  SvdResult svd = randomized_svd(snapshots, rank, oversample, options.power_iters, seed);
  return PODBasis{std::move(svd.u), std::move(svd.s)};
}

PODBasis pod_truncate(const PODBasis& basis, Index rank) {
  if (rank < 1 || rank > basis.rank()) {
    throw DimensionError("pod_truncate: rank out of range");
  }
  return PODBasis{basis.modes.leftCols(rank), basis.singular_values.head(rank)};
}

Vector pod_project(const PODBasis& basis, const Eigen::Ref<const Vector>& u) {
  if (u.size() != basis.state_dim()) {
    throw DimensionError("pod_project: state length " + std::to_string(u.size()) +
                         " != " + std::to_string(basis.state_dim()));
  }
  return basis.modes.transpose() * u;
}

Matrix pod_project_rows(const PODBasis& basis, const Eigen::Ref<const Matrix>& states) {
  if (states.cols() != basis.state_dim()) {
    throw DimensionError("pod_project_rows: state width mismatch");
  }
  return states * basis.modes;
}

Vector pod_reconstruct(const PODBasis& basis, const Eigen::Ref<const Vector>& coeffs) {
  if (coeffs.size() != basis.rank()) {
    throw DimensionError("pod_reconstruct: coefficient length " +
                         std::to_string(coeffs.size()) + " != rank " +
                         std::to_string(basis.rank()));
  }
  return basis.modes * coeffs;
}

Matrix pod_reconstruct_rows(const PODBasis& basis, const Eigen::Ref<const Matrix>& coeffs) {
  if (coeffs.cols() != basis.rank()) {
    throw DimensionError("pod_reconstruct_rows: coefficient width mismatch");
  }
  return coeffs * basis.modes.transpose();
}

double pod_truncation_error(const PODBasis& basis, const Matrix& snapshots) {
  if (snapshots.rows() != basis.state_dim()) {
    throw DimensionError("pod_truncation_error: state length mismatch");
  }
  const Matrix residual =
      snapshots - basis.modes * (basis.modes.transpose() * snapshots);
  return residual.norm();
}

}  // namespace shredrom
