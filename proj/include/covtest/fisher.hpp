#pragma once

#include "covtest/dist.hpp"
#include "covtest/frobenius.hpp"
#include "covtest/spike.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace covtest {

/// Result of the combined two-sample test. Both detector p-values are kept
/// so a rejection can be attributed to the dense or the spike signal.
struct TestOutcome {
  FrobeniusStat frob;
  EigenStat eigen;
  double t_fc = 0.0;   ///< -2 ln p1 - 2 ln p2
  double alpha = 0.05;
  double q = 0.0;      ///< (1 - alpha)-quantile of χ²₄
  bool reject = false; ///< t_fc > q
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;
};

/// p-values below this are raised to it before entering a logarithm.
inline constexpr double kPValueFloor = 1e-300;

/// -2 ln p1 - 2 ln p2. Domain error unless both lie in (0, 1].
double fisher_statistic(double p1, double p2);

struct Decision {
  double q = 0.0;
  bool reject = false;
};

/// q = χ²₄ quantile at 1 - alpha; reject iff t_fc > q.
Decision decide(double t_fc, double alpha);

/// Fisher combination of two finished detectors: floors the p-values at
/// kPValueFloor (recording a diagnostic), then forms t_fc and the decision.
TestOutcome combine(const FrobeniusStat& frob, const EigenStat& eigen, double alpha);

/// Full pipeline on two n x p samples. m = 1 uses the closed-form spike
/// p-value; m > 1 the Monte-Carlo one driven by `rng`. Errors carry the
/// stage that raised them (frobenius, spectrum, estimators, eigen_stat,
/// fisher).
TestOutcome run_test(const SampleMatrix& x1, const SampleMatrix& x2, std::size_t m,
                     double alpha, std::size_t draws, RngStream& rng);

}  // namespace covtest
