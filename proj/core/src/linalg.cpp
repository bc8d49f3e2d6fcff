#include "tvpkf/linalg.hpp"

#include <cmath>
#include <string>

namespace tvpkf {

Matrix SqrtFactor::reconstruct() const {
  if (orientation == Orientation::Lower) {
    return factor * factor.transpose();
  }
  return factor.transpose() * factor;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

SqrtFactor cholesky_factor(const Matrix& m) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::DimensionMismatch,
         "cholesky_factor requires a square matrix, got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double scale = 1.0 + max_abs(m);
  if (max_abs(m - m.transpose()) > 1e-10 * scale) {
    fail(ErrorCode::NotSymmetric, "asymmetry exceeds 1e-10 relative tolerance");
  }

  const Matrix a = symmetrized(m);
  const Eigen::Index n = a.rows();
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
  const double zero_tol = 1e-12 * std::max(max_diag, 0.0);
  const double indef_tol = -1e-8 * std::max(1.0, max_diag);

  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - lower.row(j).head(j).squaredNorm();
    if (pivot < indef_tol) {
      fail(ErrorCode::IndefiniteMatrix,
           "pivot " + std::to_string(pivot) + " at column " + std::to_string(j));
    }
    if (pivot <= zero_tol) {
      continue;  // semidefinite direction: column stays zero
    }
    lower(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      lower(i, j) =
          (a(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) /
          lower(j, j);
    }
  }
  return SqrtFactor{std::move(lower), Orientation::Lower};
}

Matrix qr_triangularize(const Matrix& a) {
  if (a.rows() < a.cols()) {
    fail(ErrorCode::DimensionMismatch,
         "qr_triangularize needs rows >= cols, got " + std::to_string(a.rows()) +
             "x" + std::to_string(a.cols()));
  }
  const Eigen::Index n = a.cols();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) r.row(i) = -r.row(i);
  }
  return r;
}

BlockQrResult block_qr_update(const Matrix& top_left, const Matrix& top_right,
                              const Matrix& bottom_left,
                              const Matrix& bottom_right) {
  const Eigen::Index k = top_left.rows();
  const Eigen::Index n = bottom_right.rows();
  if (top_left.cols() != k || bottom_right.cols() != n ||
      top_right.rows() != k || top_right.cols() != n ||
      bottom_left.rows() != n || bottom_left.cols() != k) {
    fail(ErrorCode::DimensionMismatch, "block layout must be [[k x k, k x n], [n x k, n x n]]");
  }
  Matrix stacked(k + n, k + n);
  stacked.topLeftCorner(k, k) = top_left;
  stacked.topRightCorner(k, n) = top_right;
  stacked.bottomLeftCorner(n, k) = bottom_left;
  stacked.bottomRightCorner(n, n) = bottom_right;

  const Matrix r = qr_triangularize(stacked);
  BlockQrResult out;
  out.residual_factor = r.topLeftCorner(k, k);
  out.cross_factor = r.topRightCorner(k, n).transpose();
  out.updated_factor = r.bottomRightCorner(n, n);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(out.residual_factor(i, i)) < 1e-12) {
      fail(ErrorCode::SingularDelta,
           "residual factor diagonal below 1e-12 at " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace tvpkf
