#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace covtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An n x p data matrix, one observation per row. Construction rejects empty
/// shapes and non-finite entries, so everything downstream can assume a
/// well-formed sample.
class SampleMatrix {
 public:
  explicit SampleMatrix(Matrix values);

  std::size_t n() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }

  /// Rows with the column means subtracted.
  Matrix centered() const;
  /// X Xᵀ of the raw (uncentered) rows.
  Matrix gram() const;

 private:
  Matrix values_;
};

/// Eigen-decomposition of a symmetric matrix. Values are non-increasing and
/// column k of `vectors` belongs to values[k].
struct SymEigen {
  Vector values;
  Matrix vectors;
};

/// Throws dimension error for non-square input and domain error for
/// non-finite or visibly non-symmetric input. The matrix is symmetrized as
/// (M + Mᵀ)/2 before decomposition. Each eigenvector is oriented so its
/// first nonzero coordinate is positive.
SymEigen sym_eigen(const Matrix& m);

struct CholeskyResult {
  Matrix lower;
  bool repaired = false;
  /// Spectral-norm distance between the input and the factored matrix.
  double repair_norm = 0.0;
};

/// Lower-triangular L with L Lᵀ = m'. m' equals m when m is positive definite
/// with every eigenvalue at or above `clip_floor`; otherwise the eigenvalues
/// below the floor are raised to it and `repaired` is set.
CholeskyResult cholesky_psd(const Matrix& m, double clip_floor = 1e-10);

/// Symmetric PSD square root. Eigenvalues in [-1e-6, 0) are treated as 0;
/// anything more negative is a not-psd error.
Matrix sym_sqrt(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace covtest
