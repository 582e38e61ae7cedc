#include "covtest/error.hpp"
#include "covtest/sim.hpp"
#include "covtest/spike.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using covtest::ErrorKind;
using covtest::Matrix;
using covtest::SampleMatrix;
using covtest::Vector;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const covtest::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected covtest::Error";
  return ErrorKind::io;
}

SampleMatrix model_one_sample(std::uint64_t stream, covtest::DataDist dist = covtest::DataDist::gaussian) {
  covtest::CovModelSpec spec;
  spec.dist = dist;
  covtest::RngStream rng(31337, stream);
  return covtest::generate_sample(covtest::model_diagonal(spec), 100, dist, rng);
}

covtest::SpikeEstimates manual_estimates(std::vector<double> alpha, std::vector<double> xi,
                                         double gamma4, Matrix kappa) {
  covtest::SpikeEstimates e;
  e.alpha_hat = std::move(alpha);
  e.xi_hat = std::move(xi);
  e.gamma4_hat = gamma4;
  e.kappa_hat = std::move(kappa);
  return e;
}

}  // namespace

TEST(SampleCovariance, HandValues) {
  Matrix same(2, 3);
  same << 1, 2, 3, 1, 2, 3;
  EXPECT_EQ(covtest::sample_covariance(SampleMatrix(same)), Matrix::Zero(3, 3));

  Matrix x(2, 1);
  x << 0, 2;
  EXPECT_DOUBLE_EQ(covtest::sample_covariance(SampleMatrix(x))(0, 0), 1.0);

  EXPECT_EQ(kind_of([] { covtest::sample_covariance(SampleMatrix(Matrix::Ones(1, 2))); }),
            ErrorKind::insufficient_sample);
}

TEST(SampleCovariance, DuplicatedRowsStayPsd) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  Matrix base(5, 4);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) base(i, j) = normal(gen);
  Matrix doubled(10, 4);
  doubled << base, base;
  const Matrix s = covtest::sample_covariance(SampleMatrix(doubled));
  EXPECT_EQ(s, s.transpose());
  EXPECT_GE(covtest::sym_eigen(s).values.minCoeff(), -1e-12);
}

TEST(Spectrum, ScalesWithSquareOfDataScale) {
  const SampleMatrix x = model_one_sample(1);
  const SampleMatrix x3(Matrix(3.0 * x.values()));
  const auto s1 = covtest::compute_spectrum(x);
  const auto s3 = covtest::compute_spectrum(x3);
  ASSERT_EQ(s1.eigenvalues.size(), 200);
  EXPECT_DOUBLE_EQ(s1.y, 2.0);
  for (Eigen::Index j = 0; j < 99; ++j) {
    EXPECT_NEAR(s3.eigenvalues(j), 9.0 * s1.eigenvalues(j), 1e-10 * 9.0 * s1.eigenvalues(j));
  }
  // Rank is at most n - 1 after centering; the rest is exactly zero.
  for (Eigen::Index j = 99; j < 200; ++j) EXPECT_EQ(s1.eigenvalues(j), 0.0);
}

TEST(AlphaHat, HandArithmetic) {
  const auto spec = covtest::spectrum_from_eigenvalues({10, 1, 1, 1}, 4);
  EXPECT_NEAR(covtest::alpha_hat(spec, 1), 12.0, 1e-12);
  const auto big_n = covtest::spectrum_from_eigenvalues({10, 1, 1, 1}, 1000000);
  EXPECT_NEAR(covtest::alpha_hat(big_n, 1), 10.0, 1e-3);
}

TEST(XiHat, HandArithmetic) {
  const auto spec = covtest::spectrum_from_eigenvalues({10, 1, 1, 1}, 4);
  EXPECT_NEAR(covtest::xi_hat(spec, 12.0, 1), 0.75, 1e-12);
}

TEST(SpikeIndex, DegenerateSpectraAreRejected) {
  const auto tied = covtest::spectrum_from_eigenvalues({5, 5, 1}, 10);
  EXPECT_EQ(kind_of([&] { covtest::alpha_hat(tied, 1); }), ErrorKind::degenerate_spectrum);
  EXPECT_EQ(kind_of([&] { covtest::xi_hat(tied, 5.0, 2); }), ErrorKind::degenerate_spectrum);
  const auto rank_one = covtest::spectrum_from_eigenvalues({5, 0, 0}, 10);
  EXPECT_EQ(kind_of([&] { covtest::alpha_hat(rank_one, 2); }), ErrorKind::degenerate_spectrum);
  EXPECT_EQ(kind_of([&] { covtest::alpha_hat(rank_one, 4); }), ErrorKind::degenerate_spectrum);
}

TEST(KurtosisHat, ClipsAtOne) {
  Matrix x(4, 2);
  x << 1, 1, -1, -1, 1, 1, -1, -1;
  EXPECT_EQ(covtest::kurtosis_hat(SampleMatrix(x)), 1.0);
}

TEST(KurtosisHat, ConstantDataIsDegenerate) {
  EXPECT_EQ(kind_of([] { covtest::kurtosis_hat(SampleMatrix(Matrix::Ones(5, 3))); }),
            ErrorKind::degenerate_data);
}

TEST(KurtosisHat, SeparatesGaussianFromT7) {
  std::vector<double> gauss, t7;
  for (std::uint64_t r = 0; r < 20; ++r) {
    gauss.push_back(covtest::kurtosis_hat(model_one_sample(100 + r)));
    t7.push_back(covtest::kurtosis_hat(model_one_sample(200 + r, covtest::DataDist::student_t7_standardized)));
  }
  const double g = oracle::median(gauss);
  EXPECT_GE(g, 2.5);
  EXPECT_LE(g, 3.5);
  EXPECT_GT(oracle::median(t7), 3.5);
}

TEST(ThetaRoots, TwoEigenvalueQuadratic) {
  // 2/(2-x) + 1/(1-x) = 2  ⇔  2x² - 3x = 0.
  const auto roots = covtest::theta_roots(covtest::spectrum_from_eigenvalues({2, 1}, 2));
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], 1.5, 1e-12);
  EXPECT_NEAR(roots[1], 0.0, 1e-12);
}

TEST(ThetaRoots, AllEqualEigenvaluesGiveZeros) {
  const auto roots = covtest::theta_roots(covtest::spectrum_from_eigenvalues({4, 4, 4}, 3));
  ASSERT_EQ(roots.size(), 3u);
  for (double r : roots) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(ThetaRoots, ResidualsAndInterlacing) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> jitter(0.0, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> lam(6);
    for (std::size_t j = 0; j < lam.size(); ++j) lam[j] = 0.2 + static_cast<double>(j) + jitter(gen);
    const std::size_t n = 3 + static_cast<std::size_t>(trial);
    const auto spec = covtest::spectrum_from_eigenvalues(lam, n);
    const auto roots = covtest::theta_roots(spec);
    ASSERT_EQ(roots.size(), 6u);
    for (std::size_t k = 0; k < roots.size(); ++k) {
      ASSERT_NE(roots[k], 0.0);
      EXPECT_LT(std::abs(covtest::theta_equation_residual(spec, roots[k])), 1e-9);
      const double upper = spec.eigenvalues(static_cast<Eigen::Index>(k));
      const double lower = k + 1 < 6 ? spec.eigenvalues(static_cast<Eigen::Index>(k + 1)) : -1e300;
      EXPECT_GT(roots[k], lower);
      EXPECT_LT(roots[k], upper);
    }
  }
}

TEST(ThetaRoots, TrailingZerosWhenDimensionExceedsSample) {
  const SampleMatrix x = model_one_sample(3);
  const auto spec = covtest::compute_spectrum(x);
  const auto roots = covtest::theta_roots(spec);
  ASSERT_EQ(roots.size(), 200u);
  for (std::size_t k = 99; k < 200; ++k) EXPECT_EQ(roots[k], 0.0);
  for (std::size_t k = 0; k < 99; ++k) {
    EXPECT_GT(roots[k], 0.0);
    EXPECT_LT(std::abs(covtest::theta_equation_residual(spec, roots[k])), 1e-9);
  }
}

TEST(KappaHat, SingleCoordinate) {
  const auto spec = covtest::spectrum_from_eigenvalues({3.0}, 5);
  const auto theta = covtest::theta_roots(spec);
  EXPECT_DOUBLE_EQ(covtest::kappa_hat(spec, theta, 1, 1), 1.0);
}

TEST(KappaHat, SymmetricAndConsistentWithEstimateSpikes) {
  const SampleMatrix x = model_one_sample(4);
  const auto spec = covtest::compute_spectrum(x);
  const auto theta = covtest::theta_roots(spec);
  EXPECT_EQ(covtest::kappa_hat(spec, theta, 1, 3), covtest::kappa_hat(spec, theta, 3, 1));
  const auto est = covtest::estimate_spikes(x, spec, 3);
  EXPECT_EQ(est.kappa_hat, est.kappa_hat.transpose());
  EXPECT_DOUBLE_EQ(est.kappa_hat(0, 0), covtest::kappa_hat(spec, theta, 1, 1));
  EXPECT_DOUBLE_EQ(est.kappa_hat(1, 2), covtest::kappa_hat(spec, theta, 2, 3));
}

TEST(KappaHat, NearPopulationValueOnModelOne) {
  // Σ_j u⁴_{j,1} = 1. The spike at 10 sits close to the ten 7s, so single
  // replications scatter widely; the median is the stable summary.
  std::vector<double> values;
  for (std::uint64_t r = 0; r < 30; ++r) {
    const SampleMatrix x = model_one_sample(400 + r);
    const auto spec = covtest::compute_spectrum(x);
    values.push_back(covtest::kappa_hat(spec, covtest::theta_roots(spec), 1, 1));
  }
  EXPECT_NEAR(oracle::median(values), 1.0, 0.15);
}

TEST(KappaHat, NearPopulationValueForIsolatedSpike) {
  covtest::Vector d = covtest::Vector::Ones(200);
  d(0) = 10.0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    covtest::RngStream rng(2718, r);
    const SampleMatrix x = covtest::generate_sample(d, 100, covtest::DataDist::gaussian, rng);
    const auto spec = covtest::compute_spectrum(x);
    EXPECT_NEAR(covtest::kappa_hat(spec, covtest::theta_roots(spec), 1, 1), 1.0, 0.15) << r;
  }
}

TEST(SpikeSigmaHat, PlugInArithmetic) {
  const auto e = manual_estimates({12.0}, {0.75}, 3.0, Matrix::Ones(1, 1));
  const auto cov = covtest::spike_sigma_hat(e, e, 1);
  EXPECT_DOUBLE_EQ(cov.sigma2_hat, 432.0);

  Matrix kappa(2, 2);
  kappa << 0.9, 0.2, 0.2, 0.8;
  const auto gauss = manual_estimates({12.0, 8.0}, {0.75, 0.5}, 3.0, kappa);
  const auto g = covtest::spike_sigma_hat(gauss, gauss, 2);
  EXPECT_EQ(g.sigma_e(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(g.sigma_e(1, 1), 2.0 * 2.0 * 64.0 * 0.5);

  const auto heavy = manual_estimates({12.0, 8.0}, {0.75, 0.5}, 5.0, kappa);
  const auto h = covtest::spike_sigma_hat(heavy, gauss, 2);
  EXPECT_DOUBLE_EQ(h.sigma_e(0, 1), 2.0 * 12.0 * 8.0 * 0.75 * 0.5 * 0.2);
  EXPECT_EQ(h.sigma_e(0, 1), h.sigma_e(1, 0));
}

TEST(SpikeSigmaHat, NonPositiveVarianceIsDegenerate) {
  const auto e = manual_estimates({12.0}, {0.75}, 1.0, Matrix::Constant(1, 1, 20.0));
  EXPECT_EQ(kind_of([&] { covtest::spike_sigma_hat(e, e, 1); }), ErrorKind::degenerate_variance);
}

TEST(SpikeSigmaHat, CloseToPopulationOnModelOne) {
  // Population: 2 samples × 2α²ψ'(α) with α = 10, ψ'(10) = 1 - 2/81.
  const double population = 2.0 * 2.0 * 100.0 * (1.0 - 2.0 / 81.0);
  std::vector<double> values;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const SampleMatrix x1 = model_one_sample(300 + 2 * r);
    const SampleMatrix x2 = model_one_sample(301 + 2 * r);
    const auto e1 = covtest::estimate_spikes(x1, covtest::compute_spectrum(x1), 1);
    const auto e2 = covtest::estimate_spikes(x2, covtest::compute_spectrum(x2), 1);
    values.push_back(covtest::spike_sigma_hat(e1, e2, 1).sigma2_hat);
  }
  EXPECT_NEAR(oracle::median(values) / population, 1.0, 0.35);
}

TEST(EigenStatSingle, IdenticalAndUnitShift) {
  const auto a = covtest::spectrum_from_eigenvalues({5, 2, 1}, 100);
  covtest::SpikeCovariance cov;
  cov.sigma2_hat = 400.0;
  cov.sigma_e = Matrix::Constant(1, 1, 400.0);
  const auto same = covtest::eigen_stat_single(a, a, cov);
  EXPECT_EQ(*same.t2, 0.0);
  EXPECT_EQ(same.p2, 1.0);

  const auto b = covtest::spectrum_from_eigenvalues({5.0 + 20.0 / 10.0, 2, 1}, 100);
  const auto shifted = covtest::eigen_stat_single(b, a, cov);
  EXPECT_NEAR(*shifted.t2, 1.0, 1e-12);
  EXPECT_NEAR(shifted.p2, 0.3173105078629141, 1e-12);
}

TEST(EigenStatSingle, MismatchedShapes) {
  const auto a = covtest::spectrum_from_eigenvalues({5, 2, 1}, 100);
  const auto b = covtest::spectrum_from_eigenvalues({5, 2, 1, 1}, 100);
  covtest::SpikeCovariance cov;
  cov.sigma2_hat = 1.0;
  cov.sigma_e = Matrix::Ones(1, 1);
  EXPECT_EQ(kind_of([&] { covtest::eigen_stat_single(a, b, cov); }), ErrorKind::dimension);
}

TEST(EigenStatMulti, IdenticalSpectraAndDeterminism) {
  const auto a = covtest::spectrum_from_eigenvalues({9, 7, 5, 1}, 50);
  const auto b = covtest::spectrum_from_eigenvalues({9.5, 6, 5.2, 1}, 50);
  covtest::SpikeCovariance cov;
  cov.sigma_e = Matrix::Identity(3, 3) * 100.0;
  cov.sigma_e(0, 1) = cov.sigma_e(1, 0) = 20.0;
  cov.sigma2_hat = 100.0;

  covtest::RngStream r0(1, 2);
  const auto same = covtest::eigen_stat_multi(a, a, cov, 3, 2000, r0);
  EXPECT_EQ(*same.t2m, 0.0);
  EXPECT_EQ(same.p2, 1.0);

  covtest::RngStream r1(1, 2);
  covtest::RngStream r2(1, 2);
  const auto x = covtest::eigen_stat_multi(b, a, cov, 3, 5000, r1);
  const auto y = covtest::eigen_stat_multi(b, a, cov, 3, 5000, r2);
  EXPECT_EQ(x.p2, y.p2);
  EXPECT_GT(x.p2, 0.0);
  EXPECT_NEAR(*x.t2m, std::sqrt(50.0) * (0.5 + 1.0 + 0.2), 1e-12);
  EXPECT_EQ(x.mc_draws, 5000u);
}

TEST(EigenStatMulti, SingleSpikeMatchesHalfNormal) {
  const auto a = covtest::spectrum_from_eigenvalues({9, 1}, 64);
  const auto b = covtest::spectrum_from_eigenvalues({11, 1}, 64);
  covtest::SpikeCovariance cov;
  cov.sigma2_hat = 200.0;
  cov.sigma_e = Matrix::Constant(1, 1, 200.0);
  const double exact = covtest::eigen_stat_single(b, a, cov).p2;
  covtest::RngStream rng(9, 9);
  const std::size_t draws = 200000;
  const double mc = covtest::eigen_stat_multi(b, a, cov, 1, draws, rng).p2;
  const double se = std::sqrt(exact * (1.0 - exact) / draws);
  EXPECT_LT(std::abs(mc - exact), 3.0 * se);
}

TEST(EigenStatMulti, RepairsIndefiniteCovarianceWithWarning) {
  const auto a = covtest::spectrum_from_eigenvalues({9, 7, 1}, 50);
  const auto b = covtest::spectrum_from_eigenvalues({10, 6, 1}, 50);
  covtest::SpikeCovariance cov;
  cov.sigma_e.resize(2, 2);
  cov.sigma_e << 1.0, 2.0, 2.0, 1.0;
  cov.sigma2_hat = 1.0;
  covtest::RngStream rng(3, 3);
  const auto out = covtest::eigen_stat_multi(b, a, cov, 2, 1000, rng);
  ASSERT_EQ(out.diagnostics.size(), 1u);
  EXPECT_NE(out.diagnostics[0].find("warning"), std::string::npos);
  EXPECT_NE(out.diagnostics[0].find("psd-repair"), std::string::npos);
}

TEST(EigenStatMulti, Guards) {
  const auto a = covtest::spectrum_from_eigenvalues({9, 7, 1}, 50);
  covtest::SpikeCovariance cov;
  cov.sigma_e = Matrix::Identity(2, 2);
  cov.sigma2_hat = 1.0;
  covtest::RngStream rng(3, 3);
  EXPECT_EQ(kind_of([&] { covtest::eigen_stat_multi(a, a, cov, 2, 999, rng); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { covtest::eigen_stat_multi(a, a, cov, 3, 1000, rng); }), ErrorKind::dimension);
}
