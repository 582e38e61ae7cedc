#include "covtest/matrix.hpp"

#include "covtest/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace covtest {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::dimension,
                std::string(what) + ": expected a non-empty square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Cholesky that tolerates zero pivots: a pivot at or below `tiny` zeroes its
// column instead of failing. Used only on matrices already repaired to PSD.
Matrix semidefinite_cholesky(const Matrix& a) {
  const Eigen::Index k = a.rows();
  Matrix l = Matrix::Zero(k, k);
  const double tiny = 1e-14 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < k; ++j) {
    double d = a(j, j);
    for (Eigen::Index s = 0; s < j; ++s) d -= l(j, s) * l(j, s);
    if (d <= tiny) continue;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      double v = a(i, j);
      for (Eigen::Index s = 0; s < j; ++s) v -= l(i, s) * l(j, s);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

SampleMatrix::SampleMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorKind::dimension, "sample matrix must have at least one row and one column");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::domain, "sample matrix contains non-finite entries");
  }
}

Matrix SampleMatrix::centered() const {
  const Eigen::RowVectorXd mean = values_.colwise().mean();
  return values_.rowwise() - mean;
}

Matrix SampleMatrix::gram() const { return values_ * values_.transpose(); }

SymEigen sym_eigen(const Matrix& m) {
  require_square(m, "sym_eigen");
  if (!m.allFinite()) throw Error(ErrorKind::domain, "sym_eigen: non-finite entries");
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::domain, "sym_eigen: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::domain, "sym_eigen: eigen solver did not converge");
  }

  const Eigen::Index k = sym.rows();
  // Eigen returns ascending values; reverse into descending order.
  SymEigen out{Vector(k), Matrix(k, k)};
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values(j) = solver.eigenvalues()(k - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(k - 1 - j);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double v = out.vectors(i, j);
      if (v != 0.0) {
        if (v < 0.0) out.vectors.col(j) *= -1.0;
        break;
      }
    }
  }
  return out;
}

CholeskyResult cholesky_psd(const Matrix& m, double clip_floor) {
  require_square(m, "cholesky_psd");
  if (!m.allFinite()) throw Error(ErrorKind::domain, "cholesky_psd: non-finite entries");
  if (!(clip_floor >= 0.0)) throw Error(ErrorKind::domain, "cholesky_psd: clip_floor must be >= 0");

  const SymEigen eig = sym_eigen(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  if (eig.values.minCoeff() >= clip_floor) {
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() == Eigen::Success) {
      return CholeskyResult{llt.matrixL(), false, 0.0};
    }
  }

  Vector clipped = eig.values.cwiseMax(clip_floor);
  const Matrix repaired = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
  const Matrix repaired_sym = 0.5 * (repaired + repaired.transpose());
  CholeskyResult out;
  out.repaired = true;
  out.repair_norm = (clipped - eig.values).cwiseAbs().maxCoeff();
  Eigen::LLT<Matrix> llt(repaired_sym);
  if (clip_floor > 0.0 && llt.info() == Eigen::Success) {
    out.lower = llt.matrixL();
  } else {
    out.lower = semidefinite_cholesky(repaired_sym);
  }
  return out;
}

Matrix sym_sqrt(const Matrix& m) {
  const SymEigen eig = sym_eigen(m);
  const double smallest = eig.values.minCoeff();
  if (smallest < -1e-6) {
    throw Error(ErrorKind::not_psd,
                "sym_sqrt: eigenvalue " + std::to_string(smallest) + " is below -1e-6");
  }
  const Vector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  const Matrix s = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace covtest
