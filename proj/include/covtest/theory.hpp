#pragma once

#include "covtest/matrix.hpp"

#include <variant>
#include <vector>

namespace covtest {

struct PointMass {
  double c = 1.0;
};

/// Equal-weight mixture of point masses at a and b.
struct TwoPoint {
  double a = 1.0;
  double b = 1.0;
};

struct UniformBulk {
  double lo = 0.0;
  double hi = 1.0;
};

/// Finite list of bulk eigenvalues, each carrying weight 1/size.
struct EmpiricalBulk {
  std::vector<double> eigenvalues;
};

/// Limiting (or finite) distribution H of the non-spike population
/// eigenvalues together with the aspect ratio y.
struct BulkSpectrum {
  std::variant<PointMass, TwoPoint, UniformBulk, EmpiricalBulk> shape;
  double y = 1.0;

  static BulkSpectrum point_mass(double c, double y);
  static BulkSpectrum two_point(double a, double b, double y);
  static BulkSpectrum uniform(double lo, double hi, double y);
  /// The list is sorted descending on construction.
  static BulkSpectrum empirical(std::vector<double> eigenvalues, double y);
};

/// α must be at least this far from the support of H.
inline constexpr double kSupportGap = 1e-8;

/// ψ(α) = α + yα ∫ t/(α - t) dH(t). Domain error when α is inside (or
/// within kSupportGap of) the support.
double psi(const BulkSpectrum& bulk, double alpha);

/// ψ'(α) = 1 - y ∫ t²/(α - t)² dH(t).
double psi_prime(const BulkSpectrum& bulk, double alpha);

/// ψ'(α) > 0.
bool is_supercritical(const BulkSpectrum& bulk, double alpha);

/// Population variance of the Frobenius statistic's numerator:
///
///   Σᵢ [ 4/n² tr(Σᵢ²) + 8/n tr({Σᵢ² - Σ₁Σ₂}²)
///        + 4(γᵢ - 3)/n tr(Aᵢ ∘ Aᵢ) ] + 8/n² tr²(Σ₁Σ₂),
///   Aᵢ = Σᵢ^{1/2}(Σ₁ - Σ₂)Σᵢ^{1/2}.
double population_sigma1_sq(const Matrix& sigma1, const Matrix& sigma2, double gamma4_1,
                            double gamma4_2, std::size_t n);

/// (γ₄ - 3) α² ψ'(α)² u4_sum + 2 α² ψ'(α). Domain error for a subcritical α
/// or u4_sum outside [0, 1].
double population_spike_var(const BulkSpectrum& bulk, double alpha_k, double gamma4,
                            double u4_sum);

/// (γ₄ - 3) α_k α_l ψ'(α_k) ψ'(α_l) u22_sum. Domain error unless both spikes
/// are supercritical.
double population_spike_cov(const BulkSpectrum& bulk, double alpha_k, double alpha_l,
                            double gamma4, double u22_sum);

/// Finite-sample spike location ψ_{n,K}(α) for an empirical bulk. Domain
/// error for any other bulk kind. An empty bulk gives α.
double theta_finite(const BulkSpectrum& bulk, double alpha);

}  // namespace covtest
