#pragma once

#include "covtest/matrix.hpp"

namespace covtest {

/// The Frobenius-norm detector for one pair of samples.
struct FrobeniusStat {
  double b1 = 0.0;          ///< U-statistic estimate of tr(Σ₁²)
  double b2 = 0.0;          ///< U-statistic estimate of tr(Σ₂²)
  double c = 0.0;           ///< U-statistic estimate of tr(Σ₁Σ₂)
  double sigma1_hat = 0.0;  ///< null standard deviation of b1 + b2 - 2c
  double t1 = 0.0;          ///< (b1 + b2 - 2c) / sigma1_hat
  double p1 = 1.0;          ///< one-sided p-value 1 - Φ(t1)
};

// B_n for one sample. All index tuples range over mutually distinct rows:
//
//   B = 1/P(n,2) Σ (x_jᵀx_k)²  -  2/P(n,3) Σ x_jᵀx_k x_kᵀx_l
//       + 1/P(n,4) Σ x_jᵀx_k x_lᵀx_m
//
// with P(n,r) = n!/(n-r)!. Requires n >= 4.

/// Reference evaluation by explicit enumeration of every ordered tuple.
/// O(n⁴); intended for small n and for validating b_stat_fast.
double b_stat_naive(const SampleMatrix& x);

/// Same value as b_stat_naive in O(n²p) from the Gram matrix.
double b_stat_fast(const SampleMatrix& x);

// C_n for two samples of equal size. Distinctness binds indices drawn from
// the same sample only:
//
//   C = 1/n² Σ_{j,k} (x¹_jᵀx²_k)²
//       - 1/(n²(n-1)) Σ_{j≠l} Σ_k (x¹_jᵀx²_k x²_kᵀx¹_l + x²_jᵀx¹_k x¹_kᵀx²_l)
//       + 1/(n²(n-1)²) Σ_{j≠l} Σ_{k≠m} x¹_jᵀx²_k x¹_lᵀx²_m
//
// Each normalizer is the size of its index set, which makes every term an
// unbiased, location-invariant estimator. Requires n >= 3.

double c_stat_naive(const SampleMatrix& x1, const SampleMatrix& x2);
double c_stat_fast(const SampleMatrix& x1, const SampleMatrix& x2);

/// (2/n)(b1 + b2). Degenerate-variance error when b1 + b2 <= 0.
double sigma1_hat(double b1, double b2, std::size_t n);

FrobeniusStat frobenius_test(const SampleMatrix& x1, const SampleMatrix& x2);

}  // namespace covtest
