#pragma once

#include "covtest/dist.hpp"
#include "covtest/matrix.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace covtest {

/// Sample covariance with divisor n: (1/n) Σ (x_j - x̄)(x_j - x̄)ᵀ.
Matrix sample_covariance(const SampleMatrix& x);

/// Spectrum of a sample covariance matrix.
struct SpectrumSummary {
  Vector eigenvalues;  ///< non-increasing; numerically-zero values are exactly 0
  Matrix eigenvectors; ///< column j belongs to eigenvalues[j]
  std::size_t n = 0;
  std::size_t p = 0;
  double y = 0.0;  ///< p / n
};

/// Eigenvalues at or below this fraction of max(1, λ₁) are set to exactly 0.
inline constexpr double kZeroEigenvalueRelTol = 1e-10;

SpectrumSummary compute_spectrum(const SampleMatrix& x);

/// Builds a spectrum from explicit eigenvalues (sorted descending on entry)
/// with identity eigenvectors. Intended for tests and diagnostics.
SpectrumSummary spectrum_from_eigenvalues(std::vector<double> eigenvalues, std::size_t n);

// The spike estimators below take a 1-based spike index k, matching the
// usual λ₁ ≥ λ₂ ≥ … numbering. They require λ_k to be positive and separated
// by at least 1e-8 from its neighbours; otherwise degenerate-spectrum error.

/// Estimate of the population spike behind λ_k(S):
///   ( (1 - y)/λ_k + (1/n) Σ_{j≠k} 1/(λ_k - λ_j) )⁻¹
double alpha_hat(const SpectrumSummary& spec, std::size_t k);

/// Estimate of ψ'(α_k):
///   { α̂² ( (1 - y)/λ_k² + (1/n) Σ_{j≠k} 1/(λ_k - λ_j)² ) }⁻¹
double xi_hat(const SpectrumSummary& spec, double alpha_hat_k, std::size_t k);

/// Fourth-moment (kurtosis) estimate of the data entries, floored at 1.
/// Degenerate-data error for constant data.
double kurtosis_hat(const SampleMatrix& x);

/// All p solutions ϑ of (1/p) Σ_j λ_j/(λ_j - x) = 1/y, sorted descending.
///
/// Each gap between consecutive distinct positive eigenvalues holds exactly
/// one root, and one more lies below the smallest positive eigenvalue.
/// Eigenvalues equal within kZeroEigenvalueRelTol·max(1, λ₁) form a single
/// pole; the r - 1 surplus slots of a pole of multiplicity r, and one slot per
/// zero eigenvalue, hold 0 (so for p > n the trailing entries are 0). Roots
/// are found by bisection.
std::vector<double> theta_roots(const SpectrumSummary& spec);

/// (1/p) Σ λ_j/(λ_j - x) - 1/y; the residual theta_roots drives to zero.
double theta_equation_residual(const SpectrumSummary& spec, double x);

/// Estimate of Σ_j u²_{j,k} u²_{j,l} for population eigenvectors u_k, u_l
/// (1-based k, l). Terms whose denominator vanishes count as 0.
double kappa_hat(const SpectrumSummary& spec, const std::vector<double>& theta,
                 std::size_t k, std::size_t l);

/// Per-sample bundle of spike parameter estimates for spikes 1..K.
struct SpikeEstimates {
  std::vector<double> alpha_hat;
  std::vector<double> xi_hat;
  double gamma4_hat = 3.0;
  Matrix kappa_hat;  ///< K x K, symmetric
  std::vector<double> theta_roots;

  std::size_t spikes() const { return alpha_hat.size(); }
};

SpikeEstimates estimate_spikes(const SampleMatrix& x, const SpectrumSummary& spec,
                               std::size_t spikes);

/// Covariance of the √n-scaled leading eigenvalue differences.
struct SpikeCovariance {
  double sigma2_hat = 0.0;  ///< variance for the first spike (sigma_e(0,0))
  Matrix sigma_e;           ///< m x m
};

/// Per-sample variance of spike k (0-based within the bundle):
///   (γ̂₄ - 3) α̂² ξ̂² κ̂_kk + 2 α̂² ξ̂
double spike_variance(const SpikeEstimates& est, std::size_t k);
/// Per-sample covariance of spikes k ≠ l (0-based):
///   (γ̂₄ - 3) α̂_k α̂_l ξ̂_k ξ̂_l κ̂_kl
double spike_covariance(const SpikeEstimates& est, std::size_t k, std::size_t l);

/// Sums the two samples' spike (co)variances over spikes 1..m.
SpikeCovariance spike_sigma_hat(const SpikeEstimates& est1, const SpikeEstimates& est2,
                                std::size_t m);

/// Leading-eigenvalue detector output.
struct EigenStat {
  std::size_t m = 1;
  std::optional<double> t2;   ///< single-spike standardized difference (m = 1)
  std::optional<double> t2m;  ///< √n Σ_{j≤m} |λ_j(S¹) - λ_j(S²)| (Monte-Carlo route)
  double p2 = 1.0;
  std::size_t mc_draws = 0;
  std::uint64_t mc_seed = 0;
  std::uint64_t mc_stream = 0;
  std::vector<std::string> diagnostics;

  double statistic() const { return t2 ? *t2 : t2m.value_or(0.0); }
};

/// T = √n (λ₁(S¹) - λ₁(S²)) / σ̂ with the two-sided normal p-value.
EigenStat eigen_stat_single(const SpectrumSummary& spec1, const SpectrumSummary& spec2,
                            const SpikeCovariance& cov);

/// Relative spectral-norm size of a PSD repair that still passes silently.
inline constexpr double kRepairBudget = 1e-3;
inline constexpr std::size_t kMinMonteCarloDraws = 1000;

/// T = √n Σ_{j≤m} |λ_j(S¹) - λ_j(S²)| with the p-value P(‖W‖₁ ≥ T),
/// W ~ N_m(0, Σ̂_E), estimated from `draws` samples with add-one smoothing:
/// (1 + #{‖W‖₁ ≥ T}) / (draws + 1).
EigenStat eigen_stat_multi(const SpectrumSummary& spec1, const SpectrumSummary& spec2,
                           const SpikeCovariance& cov, std::size_t m, std::size_t draws,
                           RngStream& rng);

}  // namespace covtest
