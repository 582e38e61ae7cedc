#include "covtest/spike.hpp"

#include "covtest/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

namespace covtest {

namespace {

constexpr double kSpikeGap = 1e-8;
constexpr int kMaxBisection = 200;

double zero_tolerance(const Vector& eigenvalues) {
  const double top = eigenvalues.size() > 0 ? eigenvalues(0) : 0.0;
  return kZeroEigenvalueRelTol * std::max(1.0, top);
}

// num/den, except that a vanishing denominator contributes nothing.
double guarded_ratio(double num, double den, double tol) {
  return std::abs(den) <= tol ? 0.0 : num / den;
}

void require_spike_index(const SpectrumSummary& spec, std::size_t k, const char* what) {
  const auto p = static_cast<std::size_t>(spec.eigenvalues.size());
  if (k < 1 || k > p) {
    throw Error(ErrorKind::degenerate_spectrum,
                std::string(what) + ": spike index " + std::to_string(k) +
                    " outside 1.." + std::to_string(p));
  }
  const Vector& lam = spec.eigenvalues;
  const auto i = static_cast<Eigen::Index>(k - 1);
  if (!(lam(i) > 0.0)) {
    throw Error(ErrorKind::degenerate_spectrum,
                std::string(what) + ": eigenvalue " + std::to_string(k) + " is zero");
  }
  const bool below_ok = i + 1 >= lam.size() || lam(i) - lam(i + 1) >= kSpikeGap;
  const bool above_ok = i == 0 || lam(i - 1) - lam(i) >= kSpikeGap;
  if (!below_ok || !above_ok) {
    throw Error(ErrorKind::degenerate_spectrum,
                std::string(what) + ": eigenvalue " + std::to_string(k) +
                    " is not separated from its neighbours by " + std::to_string(kSpikeGap));
  }
}

// Bisection on an increasing function with g(lo) < 0 < g(hi) in the open
// interval (lo, hi).
double bisect_increasing(const std::function<double(double)>& g, double lo, double hi) {
  double best = 0.5 * (lo + hi);
  double best_abs = std::abs(g(best));
  for (int iter = 0; iter < kMaxBisection; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = g(mid);
    if (!std::isfinite(value)) break;
    if (std::abs(value) < best_abs) {
      best = mid;
      best_abs = std::abs(value);
    }
    if (value == 0.0) break;
    if (value < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace

Matrix sample_covariance(const SampleMatrix& x) {
  if (x.n() < 2) {
    throw Error(ErrorKind::insufficient_sample, "sample_covariance: needs at least 2 observations");
  }
  const Matrix centered = x.centered();
  Matrix s = centered.transpose() * centered / static_cast<double>(x.n());
  return 0.5 * (s + s.transpose());
}

SpectrumSummary compute_spectrum(const SampleMatrix& x) {
  SymEigen eig = sym_eigen(sample_covariance(x));
  const double tol = zero_tolerance(eig.values);
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    if (eig.values(j) <= tol) eig.values(j) = 0.0;
  }
  SpectrumSummary out;
  out.eigenvalues = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  out.n = x.n();
  out.p = x.p();
  out.y = static_cast<double>(out.p) / static_cast<double>(out.n);
  return out;
}

SpectrumSummary spectrum_from_eigenvalues(std::vector<double> eigenvalues, std::size_t n) {
  if (eigenvalues.empty() || n == 0) {
    throw Error(ErrorKind::dimension, "spectrum_from_eigenvalues: empty spectrum or n = 0");
  }
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  SpectrumSummary out;
  const auto p = static_cast<Eigen::Index>(eigenvalues.size());
  out.eigenvalues = Eigen::Map<const Vector>(eigenvalues.data(), p);
  out.eigenvectors = Matrix::Identity(p, p);
  out.n = n;
  out.p = eigenvalues.size();
  out.y = static_cast<double>(out.p) / static_cast<double>(n);
  return out;
}

double alpha_hat(const SpectrumSummary& spec, std::size_t k) {
  require_spike_index(spec, k, "alpha_hat");
  const Vector& lam = spec.eigenvalues;
  const auto i = static_cast<Eigen::Index>(k - 1);
  const double lk = lam(i);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (j != i) sum += 1.0 / (lk - lam(j));
  }
  const double denom = (1.0 - spec.y) / lk + sum / static_cast<double>(spec.n);
  if (!std::isfinite(denom) || std::abs(denom) * lk < 1e-12) {
    throw Error(ErrorKind::degenerate_spectrum,
                "alpha_hat: denominator vanishes for spike " + std::to_string(k));
  }
  return 1.0 / denom;
}

double xi_hat(const SpectrumSummary& spec, double alpha_hat_k, std::size_t k) {
  require_spike_index(spec, k, "xi_hat");
  const Vector& lam = spec.eigenvalues;
  const auto i = static_cast<Eigen::Index>(k - 1);
  const double lk = lam(i);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (j == i) continue;
    const double d = lk - lam(j);
    sum += 1.0 / (d * d);
  }
  const double inner = (1.0 - spec.y) / (lk * lk) + sum / static_cast<double>(spec.n);
  const double denom = alpha_hat_k * alpha_hat_k * inner;
  if (!std::isfinite(denom) || std::abs(inner) * lk * lk < 1e-12) {
    throw Error(ErrorKind::degenerate_spectrum,
                "xi_hat: denominator vanishes for spike " + std::to_string(k));
  }
  return 1.0 / denom;
}

double kurtosis_hat(const SampleMatrix& x) {
  if (x.n() < 2) {
    throw Error(ErrorKind::insufficient_sample, "kurtosis_hat: needs at least 2 observations");
  }
  const double n = static_cast<double>(x.n());
  const Matrix centered = x.centered();
  const Matrix s = centered.transpose() * centered / n;

  const double trace = s.trace();
  const double tau = s.squaredNorm() - trace * trace / n;

  const Vector norms = centered.rowwise().squaredNorm();
  const double mean_norm = norms.mean();
  const double nu = (norms.array() - mean_norm).square().sum() / (n - 1.0);

  const double omega = s.diagonal().squaredNorm();
  if (!(omega > 0.0)) {
    throw Error(ErrorKind::degenerate_data, "kurtosis_hat: every coordinate is constant");
  }
  return std::max(3.0 + (nu - 2.0 * tau) / omega, 1.0);
}

double theta_equation_residual(const SpectrumSummary& spec, double x) {
  const Vector& lam = spec.eigenvalues;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam(j) != 0.0) sum += lam(j) / (lam(j) - x);
  }
  return sum / static_cast<double>(spec.p) - 1.0 / spec.y;
}

std::vector<double> theta_roots(const SpectrumSummary& spec) {
  const Vector& lam = spec.eigenvalues;
  const double tol = zero_tolerance(lam);
  const auto g = [&spec](double x) { return theta_equation_residual(spec, x); };

  // Group the positive eigenvalues into clusters of (numerically) equal
  // values; each cluster acts as a single pole.
  struct Cluster {
    Eigen::Index first;
    Eigen::Index last;  // inclusive
  };
  std::vector<Cluster> clusters;
  Eigen::Index zeros = 0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam(j) <= 0.0) {
      ++zeros;
      continue;
    }
    if (!clusters.empty() && lam(clusters.back().last) - lam(j) <= tol) {
      clusters.back().last = j;
    } else {
      clusters.push_back({j, j});
    }
  }

  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(lam.size()));
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const Cluster& cl = clusters[c];
    // A cluster of r equal eigenvalues is one pole; its r - 1 surplus slots
    // are filled with 0 like the zero eigenvalues.
    zeros += cl.last - cl.first;

    const double hi = lam(cl.last);
    double lo = 0.0;
    if (c + 1 < clusters.size()) {
      lo = lam(clusters[c + 1].first);
    } else {
      // Below the smallest pole the left side tends to 0 - 1/y < 0 as
      // x → -∞; step left until the sign is right.
      double step = std::max(1.0, hi);
      lo = 0.0;
      int expansions = 0;
      while (!(g(lo) < 0.0)) {
        lo = -step;
        step *= 2.0;
        if (++expansions > kMaxBisection) {
          std::ostringstream msg;
          msg << "theta_roots: no sign change below smallest eigenvalue " << hi
              << " (last left end " << lo << ")";
          throw Error(ErrorKind::root_finding, msg.str());
        }
      }
    }
    if (!(lo < hi)) {
      std::ostringstream msg;
      msg << "theta_roots: empty bracket (" << lo << ", " << hi << ")";
      throw Error(ErrorKind::root_finding, msg.str());
    }
    roots.push_back(bisect_increasing(g, lo, hi));
  }
  roots.insert(roots.end(), static_cast<std::size_t>(zeros), 0.0);
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

namespace {

// ρ_k(m) for every m (0-based k). See kappa_hat.
Vector rho_weights(const SpectrumSummary& spec, const std::vector<double>& theta,
                   Eigen::Index k) {
  const Vector& lam = spec.eigenvalues;
  const double tol = zero_tolerance(lam);
  const Eigen::Index p = lam.size();
  Vector rho(p);
  for (Eigen::Index m = 0; m < p; ++m) {
    if (m == k) {
      double eta = 0.0;
      for (Eigen::Index l = 0; l < p; ++l) {
        if (l == k) continue;
        const auto th = theta[static_cast<std::size_t>(l)];
        eta += guarded_ratio(lam(l), lam(k) - lam(l), tol) -
               guarded_ratio(th, lam(k) - th, tol);
      }
      rho(m) = 1.0 + eta;
    } else {
      const auto th = theta[static_cast<std::size_t>(k)];
      const double zeta =
          guarded_ratio(lam(k), lam(m) - lam(k), tol) - guarded_ratio(th, lam(m) - th, tol);
      rho(m) = -zeta;
    }
  }
  return rho;
}

// v_k(i) = Σ_m ρ_k(m) g²_{i,m}: the estimated squared coordinates of the
// k-th population eigenvector.
Vector squared_loading_estimate(const SpectrumSummary& spec, const std::vector<double>& theta,
                                Eigen::Index k) {
  return spec.eigenvectors.cwiseAbs2() * rho_weights(spec, theta, k);
}

void require_theta(const SpectrumSummary& spec, const std::vector<double>& theta) {
  if (theta.size() != spec.p) {
    throw Error(ErrorKind::dimension, "kappa_hat: theta vector must have one entry per eigenvalue");
  }
}

}  // namespace

double kappa_hat(const SpectrumSummary& spec, const std::vector<double>& theta, std::size_t k,
                 std::size_t l) {
  require_theta(spec, theta);
  if (k < 1 || l < 1 || k > spec.p || l > spec.p) {
    throw Error(ErrorKind::degenerate_spectrum, "kappa_hat: spike index out of range");
  }
  const Vector vk = squared_loading_estimate(spec, theta, static_cast<Eigen::Index>(k - 1));
  if (k == l) return vk.squaredNorm();
  const Vector vl = squared_loading_estimate(spec, theta, static_cast<Eigen::Index>(l - 1));
  return vk.dot(vl);
}

SpikeEstimates estimate_spikes(const SampleMatrix& x, const SpectrumSummary& spec,
                               std::size_t spikes) {
  if (spikes < 1) throw Error(ErrorKind::config, "estimate_spikes: need at least one spike");
  SpikeEstimates out;
  out.alpha_hat.reserve(spikes);
  out.xi_hat.reserve(spikes);
  for (std::size_t k = 1; k <= spikes; ++k) {
    const double a = alpha_hat(spec, k);
    out.alpha_hat.push_back(a);
    out.xi_hat.push_back(xi_hat(spec, a, k));
  }
  out.gamma4_hat = kurtosis_hat(x);
  out.theta_roots = theta_roots(spec);

  std::vector<Vector> loadings;
  loadings.reserve(spikes);
  for (std::size_t k = 0; k < spikes; ++k) {
    loadings.push_back(
        squared_loading_estimate(spec, out.theta_roots, static_cast<Eigen::Index>(k)));
  }
  const auto kk = static_cast<Eigen::Index>(spikes);
  out.kappa_hat = Matrix(kk, kk);
  for (Eigen::Index a = 0; a < kk; ++a) {
    for (Eigen::Index b = a; b < kk; ++b) {
      const double v = loadings[static_cast<std::size_t>(a)].dot(loadings[static_cast<std::size_t>(b)]);
      out.kappa_hat(a, b) = v;
      out.kappa_hat(b, a) = v;
    }
  }
  return out;
}

double spike_variance(const SpikeEstimates& est, std::size_t k) {
  const double a = est.alpha_hat.at(k);
  const double xi = est.xi_hat.at(k);
  const auto i = static_cast<Eigen::Index>(k);
  return (est.gamma4_hat - 3.0) * a * a * xi * xi * est.kappa_hat(i, i) + 2.0 * a * a * xi;
}

double spike_covariance(const SpikeEstimates& est, std::size_t k, std::size_t l) {
  return (est.gamma4_hat - 3.0) * est.alpha_hat.at(k) * est.alpha_hat.at(l) * est.xi_hat.at(k) *
         est.xi_hat.at(l) *
         est.kappa_hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
}

SpikeCovariance spike_sigma_hat(const SpikeEstimates& est1, const SpikeEstimates& est2,
                                std::size_t m) {
  if (m < 1 || m > est1.spikes() || m > est2.spikes()) {
    throw Error(ErrorKind::dimension, "spike_sigma_hat: estimates do not cover spikes 1.." +
                                          std::to_string(m));
  }
  const auto mm = static_cast<Eigen::Index>(m);
  SpikeCovariance out;
  out.sigma_e = Matrix(mm, mm);
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out.sigma_e(i, i) = spike_variance(est1, k) + spike_variance(est2, k);
    for (std::size_t l = k + 1; l < m; ++l) {
      const auto j = static_cast<Eigen::Index>(l);
      const double v = spike_covariance(est1, k, l) + spike_covariance(est2, k, l);
      out.sigma_e(i, j) = v;
      out.sigma_e(j, i) = v;
    }
    if (!(out.sigma_e(i, i) > 0.0) || !std::isfinite(out.sigma_e(i, i))) {
      throw Error(ErrorKind::degenerate_variance,
                  "spike_sigma_hat: variance of spike " + std::to_string(k + 1) +
                      " is not positive (" + std::to_string(out.sigma_e(i, i)) + ")");
    }
  }
  out.sigma2_hat = out.sigma_e(0, 0);
  return out;
}

namespace {

void require_matching(const SpectrumSummary& a, const SpectrumSummary& b) {
  if (a.n != b.n || a.p != b.p) {
    throw Error(ErrorKind::dimension, "eigen statistic: spectra come from different (n, p)");
  }
}

}  // namespace

EigenStat eigen_stat_single(const SpectrumSummary& spec1, const SpectrumSummary& spec2,
                            const SpikeCovariance& cov) {
  require_matching(spec1, spec2);
  if (!(cov.sigma2_hat > 0.0)) {
    throw Error(ErrorKind::degenerate_variance, "eigen_stat_single: variance estimate is not positive");
  }
  EigenStat out;
  out.m = 1;
  const double root_n = std::sqrt(static_cast<double>(spec1.n));
  const double t = root_n * (spec1.eigenvalues(0) - spec2.eigenvalues(0)) / std::sqrt(cov.sigma2_hat);
  out.t2 = t;
  out.p2 = 2.0 * std_normal_sf(std::abs(t));
  return out;
}

EigenStat eigen_stat_multi(const SpectrumSummary& spec1, const SpectrumSummary& spec2,
                           const SpikeCovariance& cov, std::size_t m, std::size_t draws,
                           RngStream& rng) {
  require_matching(spec1, spec2);
  if (m < 1 || m > spec1.p || static_cast<Eigen::Index>(m) > cov.sigma_e.rows()) {
    throw Error(ErrorKind::dimension, "eigen_stat_multi: m = " + std::to_string(m) +
                                          " exceeds the available spikes");
  }
  if (draws < kMinMonteCarloDraws) {
    throw Error(ErrorKind::config, "eigen_stat_multi: at least " +
                                       std::to_string(kMinMonteCarloDraws) +
                                       " Monte-Carlo draws are required");
  }
  EigenStat out;
  out.m = m;
  out.mc_draws = draws;
  out.mc_seed = rng.seed();
  out.mc_stream = rng.stream();

  const auto mm = static_cast<Eigen::Index>(m);
  double stat = 0.0;
  for (Eigen::Index j = 0; j < mm; ++j) {
    stat += std::abs(spec1.eigenvalues(j) - spec2.eigenvalues(j));
  }
  stat *= std::sqrt(static_cast<double>(spec1.n));
  out.t2m = stat;

  const Matrix sigma = cov.sigma_e.topLeftCorner(mm, mm);
  const CholeskyResult chol = cholesky_psd(sigma);
  if (chol.repaired) {
    const double scale = sym_eigen(sigma).values.cwiseAbs().maxCoeff();
    std::ostringstream msg;
    msg << "psd-repair: spike covariance clipped by " << chol.repair_norm;
    if (chol.repair_norm > kRepairBudget * scale) {
      msg << " (exceeds budget " << kRepairBudget << " x " << scale << ")";
      out.diagnostics.push_back("warning: " + msg.str());
    } else {
      out.diagnostics.push_back(msg.str());
    }
  }

  std::size_t exceed = 0;
  Vector z(mm);
  for (std::size_t d = 0; d < draws; ++d) {
    for (Eigen::Index j = 0; j < mm; ++j) z(j) = rng.normal();
    const double norm1 = (chol.lower * z).cwiseAbs().sum();
    if (norm1 >= stat) ++exceed;
  }
  out.p2 = static_cast<double>(exceed + 1) / static_cast<double>(draws + 1);
  return out;
}

}  // namespace covtest
