#include "covtest/error.hpp"
#include "covtest/matrix.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using covtest::Error;
using covtest::ErrorKind;
using covtest::Matrix;
using covtest::Vector;

namespace {

Matrix random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(gen);
  return 0.5 * (g + g.transpose());
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected covtest::Error";
  return ErrorKind::io;
}

}  // namespace

TEST(SampleMatrix, RejectsEmptyAndNonFinite) {
  EXPECT_EQ(kind_of([] { covtest::SampleMatrix(Matrix(0, 3)); }), ErrorKind::dimension);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { covtest::SampleMatrix{bad}; }), ErrorKind::domain);
}

TEST(SymEigen, IdentityAndDiagonal) {
  const auto id = covtest::sym_eigen(Matrix::Identity(3, 3));
  EXPECT_TRUE(id.values.isApprox(Vector::Ones(3)));
  EXPECT_LT((id.vectors.transpose() * id.vectors - Matrix::Identity(3, 3)).norm(), 1e-12);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 10.0, 7.0;
  const auto eig = covtest::sym_eigen(d);
  EXPECT_DOUBLE_EQ(eig.values(0), 10.0);
  EXPECT_DOUBLE_EQ(eig.values(1), 7.0);
  EXPECT_DOUBLE_EQ(eig.values(2), 1.0);
  // Permutation-aligned standard basis with positive orientation.
  EXPECT_NEAR(eig.vectors(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(eig.vectors(2, 1), 1.0, 1e-14);
  EXPECT_NEAR(eig.vectors(0, 2), 1.0, 1e-14);
}

TEST(SymEigen, MatchesCharacteristicPolynomialOracle) {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = random_symmetric(gen, 5);
    const auto eig = covtest::sym_eigen(a);
    const auto expected = oracle::charpoly_eigenvalues(a);
    ASSERT_EQ(expected.size(), 5u);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(eig.values(k), expected[k], 1e-8) << "trial " << trial;
  }
}

TEST(SymEigen, ContractHoldsOnRandomInputs) {
  std::mt19937_64 gen(7);
  for (Eigen::Index n = 1; n <= 20; ++n) {
    const Matrix a = random_symmetric(gen, n);
    const auto eig = covtest::sym_eigen(a);
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    EXPECT_LT((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(),
              1e-8);
    const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    EXPECT_LT((rebuilt - a).cwiseAbs().maxCoeff() / scale, 1e-8);
    EXPECT_NEAR(eig.values.sum(), a.trace(), 1e-8 * scale * n);
    for (Eigen::Index k = 1; k < n; ++k) EXPECT_GE(eig.values(k - 1), eig.values(k));
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index first = 0;
      while (first < n && std::abs(eig.vectors(first, k)) < 1e-300) ++first;
      ASSERT_LT(first, n);
      EXPECT_GT(eig.vectors(first, k), 0.0);
    }
  }
}

TEST(SymEigen, DeterministicForIdenticalInput) {
  std::mt19937_64 gen(3);
  const Matrix a = random_symmetric(gen, 8);
  const auto e1 = covtest::sym_eigen(a);
  const auto e2 = covtest::sym_eigen(a);
  EXPECT_EQ(e1.values, e2.values);
  EXPECT_EQ(e1.vectors, e2.vectors);
}

TEST(SymEigen, Errors) {
  EXPECT_EQ(kind_of([] { covtest::sym_eigen(Matrix::Ones(2, 3)); }), ErrorKind::dimension);
  Matrix inf = Matrix::Identity(2, 2);
  inf(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(kind_of([&] { covtest::sym_eigen(inf); }), ErrorKind::domain);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_EQ(kind_of([&] { covtest::sym_eigen(asym); }), ErrorKind::domain);
}

TEST(CholeskyPsd, PositiveDefiniteInputsAreNotRepaired) {
  const auto id = covtest::cholesky_psd(Matrix::Identity(3, 3));
  EXPECT_FALSE(id.repaired);
  EXPECT_TRUE(id.lower.isApprox(Matrix::Identity(3, 3)));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  const auto r = covtest::cholesky_psd(d);
  EXPECT_FALSE(r.repaired);
  EXPECT_DOUBLE_EQ(r.lower(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(r.lower(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(r.lower(0, 1), 0.0);
}

TEST(CholeskyPsd, ClipsSlightlyIndefiniteInput) {
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  Matrix rot(2, 2);
  rot << c, -s, s, c;
  Matrix lam = Matrix::Zero(2, 2);
  lam.diagonal() << 1.0, -1e-12;
  const Matrix m = rot * lam * rot.transpose();

  const auto r = covtest::cholesky_psd(m, 1e-10);
  EXPECT_TRUE(r.repaired);
  lam(1, 1) = 1e-10;
  const Matrix clipped = rot * lam * rot.transpose();
  EXPECT_LT((r.lower * r.lower.transpose() - clipped).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(r.repair_norm, 1e-10 + 1e-12, 1e-14);
  EXPECT_DOUBLE_EQ(r.lower(0, 1), 0.0);

  const Vector ev = covtest::sym_eigen(r.lower * r.lower.transpose()).values;
  EXPECT_GE(ev.minCoeff(), 1e-10 - 1e-12);
}

TEST(CholeskyPsd, RankDeficientWithZeroFloor) {
  Matrix v(3, 1);
  v << 1.0, 2.0, 2.0;
  const Matrix m = v * v.transpose();
  const auto r = covtest::cholesky_psd(m, 0.0);
  EXPECT_LT((r.lower * r.lower.transpose() - m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CholeskyPsd, NonSquareIsDimensionError) {
  EXPECT_EQ(kind_of([] { covtest::cholesky_psd(Matrix::Ones(2, 3)); }), ErrorKind::dimension);
}

TEST(SymSqrt, DiagonalAndIdentity) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 4.0, 9.0, 25.0;
  const Matrix s = covtest::sym_sqrt(d);
  EXPECT_NEAR(s(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(s(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(s(2, 2), 5.0, 1e-14);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-14);
  EXPECT_TRUE(covtest::sym_sqrt(Matrix::Identity(4, 4)).isApprox(Matrix::Identity(4, 4)));
}

TEST(SymSqrt, SquaresBackAndRejectsNegative) {
  std::mt19937_64 gen(11);
  const Matrix g = random_symmetric(gen, 6);
  const Matrix psd = g * g.transpose();
  const Matrix s = covtest::sym_sqrt(psd);
  EXPECT_LT((s * s - psd).cwiseAbs().maxCoeff() / psd.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-14);

  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -1e-3;
  EXPECT_EQ(kind_of([&] { covtest::sym_sqrt(neg); }), ErrorKind::not_psd);
  neg(1, 1) = -1e-9;
  EXPECT_NO_THROW(covtest::sym_sqrt(neg));
}
