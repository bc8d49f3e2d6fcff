#pragma once

#include <Eigen/Dense>

#include "tvpkf/errors.hpp"

namespace tvpkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Orientation { Lower, Upper };

/// Triangular factor of a symmetric PSD matrix.
/// Lower orientation: P = F F'.  Upper orientation: P = F' F.
struct SqrtFactor {
  Matrix factor;
  Orientation orientation = Orientation::Lower;

  Eigen::Index dim() const { return factor.rows(); }
  Matrix reconstruct() const;
};

Matrix symmetrized(const Matrix& m);
double max_abs(const Matrix& m);

/// Lower-triangular Cholesky factor of a symmetric PSD matrix.
/// Semidefinite inputs are handled by zeroing columns whose pivot falls
/// below 1e-12 times the largest diagonal entry; pivots below -1e-8
/// (scaled) raise IndefiniteMatrix.  The input is symmetrized before
/// factorization.
SqrtFactor cholesky_factor(const Matrix& m);

/// Upper-triangular R from the QR decomposition of `a` (rows >= cols),
/// with row signs flipped so the diagonal is nonnegative.  Satisfies
/// R'R = A'A, which makes it the triangularization operator used by the
/// covariance propagation.
Matrix qr_triangularize(const Matrix& a);

/// Result of triangularizing the stacked pre-array
///   [ top_left     top_right ]      ->  [ residual_factor  cross' ]
///   [ bottom_left  bottom_right ]       [ 0                updated_factor ]
/// residual_factor is k-by-k upper triangular (S = R'R), cross_factor is
/// the transposed top-right block (n-by-k), updated_factor is the n-by-n
/// upper-triangular factor of the posterior covariance.
struct BlockQrResult {
  Matrix residual_factor;
  Matrix cross_factor;
  Matrix updated_factor;
};

BlockQrResult block_qr_update(const Matrix& top_left, const Matrix& top_right,
                              const Matrix& bottom_left,
                              const Matrix& bottom_right);

}  // namespace tvpkf
