#include "covtest/error.hpp"
#include "covtest/fisher.hpp"
#include "covtest/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using covtest::ErrorKind;
using covtest::Matrix;
using covtest::SampleMatrix;

namespace {

covtest::FrobeniusStat frob_with_p(double p1) {
  covtest::FrobeniusStat f;
  f.p1 = p1;
  return f;
}

covtest::EigenStat eigen_with_p(double p2) {
  covtest::EigenStat e;
  e.t2 = 0.0;
  e.p2 = p2;
  return e;
}

SampleMatrix model_sample(int which, double delta, std::uint64_t stream) {
  covtest::CovModelSpec spec{covtest::ModelId::m1, delta, 200, 100, covtest::DataDist::gaussian,
                             which};
  covtest::RngStream rng(555, stream);
  return covtest::generate_sample(covtest::model_diagonal(spec), 100, spec.dist, rng);
}

}  // namespace

TEST(FisherStatistic, HandValues) {
  EXPECT_EQ(covtest::fisher_statistic(1.0, 1.0), 0.0);
  EXPECT_NEAR(covtest::fisher_statistic(std::exp(-1.0), std::exp(-1.0)), 4.0, 1e-14);
  EXPECT_NEAR(covtest::fisher_statistic(0.05, 0.05), 11.982929094215963, 1e-12);
}

TEST(FisherStatistic, DomainErrors) {
  for (auto [p1, p2] : {std::pair{0.0, 0.5}, std::pair{0.5, -0.1}, std::pair{1.5, 0.5},
                        std::pair{0.5, std::nan("")}}) {
    try {
      covtest::fisher_statistic(p1, p2);
      FAIL();
    } catch (const covtest::Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
  }
}

TEST(FisherStatistic, MonotoneInEachPValue) {
  double prev = covtest::fisher_statistic(1.0, 0.3);
  for (double p = 0.9; p > 1e-6; p *= 0.7) {
    const double t = covtest::fisher_statistic(p, 0.3);
    EXPECT_GT(t, prev);
    EXPECT_EQ(t, covtest::fisher_statistic(0.3, p));
    prev = t;
  }
}

TEST(Decide, ThresholdIsStrict) {
  const auto d = covtest::decide(12.0, 0.05);
  EXPECT_NEAR(d.q, 9.487729036781154, 1e-10);
  EXPECT_TRUE(d.reject);
  EXPECT_FALSE(covtest::decide(d.q, 0.05).reject);
  EXPECT_TRUE(covtest::decide(std::nextafter(d.q, 100.0), 0.05).reject);
  EXPECT_FALSE(covtest::decide(0.0, 0.05).reject);
}

TEST(Combine, FloorsTinyPValuesWithDiagnostic) {
  const auto out = covtest::combine(frob_with_p(0.0), eigen_with_p(0.5), 0.05);
  EXPECT_EQ(out.frob.p1, covtest::kPValueFloor);
  ASSERT_EQ(out.diagnostics.size(), 1u);
  EXPECT_EQ(out.diagnostics[0].rfind("p-value-floor", 0), 0u);
  EXPECT_TRUE(std::isfinite(out.t_fc));
  EXPECT_NEAR(out.t_fc, -2.0 * std::log(1e-300) - 2.0 * std::log(0.5), 1e-9);
  EXPECT_TRUE(out.reject);

  const auto clean = covtest::combine(frob_with_p(0.2), eigen_with_p(0.5), 0.05);
  EXPECT_TRUE(clean.diagnostics.empty());
  EXPECT_DOUBLE_EQ(clean.t_fc, covtest::fisher_statistic(0.2, 0.5));
}

TEST(RunTest, ConsistentOutcome) {
  const SampleMatrix x1 = model_sample(1, 0.0, 1);
  const SampleMatrix x2 = model_sample(2, 20.0, 2);
  covtest::RngStream rng(8, 0);
  const auto out = covtest::run_test(x1, x2, 1, 0.05, 1000, rng);
  EXPECT_DOUBLE_EQ(out.t_fc, -2.0 * std::log(out.frob.p1) - 2.0 * std::log(out.eigen.p2));
  EXPECT_EQ(out.reject, out.t_fc > out.q);
  EXPECT_TRUE(out.eigen.t2.has_value());
  EXPECT_TRUE(out.reject);
  EXPECT_EQ(out.seed, 8u);
}

TEST(RunTest, InvariantUnderSampleSwapForFrobenius) {
  const SampleMatrix x1 = model_sample(1, 0.0, 3);
  const SampleMatrix x2 = model_sample(1, 0.0, 4);
  covtest::RngStream r1(1, 0), r2(1, 0);
  const auto a = covtest::run_test(x1, x2, 1, 0.05, 1000, r1);
  const auto b = covtest::run_test(x2, x1, 1, 0.05, 1000, r2);
  EXPECT_NEAR(a.frob.t1, b.frob.t1, 1e-9 * std::max(1.0, std::abs(a.frob.t1)));
  EXPECT_NEAR(*a.eigen.t2, -*b.eigen.t2, 1e-9 * std::max(1.0, std::abs(*a.eigen.t2)));
  EXPECT_NEAR(a.t_fc, b.t_fc, 1e-9 * std::max(1.0, a.t_fc));
}

TEST(RunTest, MultiSpikeIsSeedDeterministic) {
  const SampleMatrix x1 = model_sample(1, 0.0, 5);
  const SampleMatrix x2 = model_sample(2, 5.0, 6);
  covtest::RngStream r1(21, 0), r2(21, 0);
  const auto a = covtest::run_test(x1, x2, 3, 0.05, 2000, r1);
  const auto b = covtest::run_test(x1, x2, 3, 0.05, 2000, r2);
  EXPECT_EQ(a.eigen.p2, b.eigen.p2);
  EXPECT_EQ(a.t_fc, b.t_fc);
  EXPECT_TRUE(a.eigen.t2m.has_value());
  EXPECT_EQ(a.eigen.mc_draws, 2000u);
}

TEST(RunTest, DimensionMismatchNamesStage) {
  const SampleMatrix x1(Matrix::Identity(10, 4));
  const SampleMatrix x2(Matrix::Identity(10, 5));
  covtest::RngStream rng(1, 0);
  try {
    covtest::run_test(x1, x2, 1, 0.05, 1000, rng);
    FAIL();
  } catch (const covtest::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
    EXPECT_EQ(e.stage(), "frobenius");
  }
}

TEST(RunTest, RankDeficientSpikesAreNumericalErrors) {
  Matrix x = Matrix::Zero(10, 4);
  for (Eigen::Index i = 0; i < 10; ++i) x(i, 0) = static_cast<double>(i % 3) - 1.0;
  Matrix x2 = x;
  x2(0, 1) = 0.5;
  covtest::RngStream rng(1, 0);
  try {
    covtest::run_test(SampleMatrix(x), SampleMatrix(x2), 3, 0.05, 1000, rng);
    FAIL();
  } catch (const covtest::Error& e) {
    EXPECT_TRUE(covtest::is_numerical(e.kind()));
    EXPECT_EQ(e.stage(), "estimators");
  }
}

TEST(RunTest, InputGuards) {
  const SampleMatrix x(Matrix::Identity(10, 4));
  covtest::RngStream rng(1, 0);
  try {
    covtest::run_test(x, x, 0, 0.05, 1000, rng);
    FAIL();
  } catch (const covtest::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_EQ(e.stage(), "input");
  }
  try {
    covtest::run_test(x, x, 1, 1.0, 1000, rng);
    FAIL();
  } catch (const covtest::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}
