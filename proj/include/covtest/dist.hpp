#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace covtest {

/// Deterministic random stream identified by (seed, stream id). Two streams
/// with the same pair produce the same sequence regardless of which thread
/// drives them or what other streams have done. A stream is single-owner.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double normal() { return normal_(engine_); }
  double student_t7() { return t7_(engine_); }
  double exponential() { return exponential_(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::student_t_distribution<double> t7_{7.0};
  std::exponential_distribution<double> exponential_{1.0};
};

/// Entry distributions for the simulated data, each with mean 0 and
/// variance 1.
enum class DataDist { gaussian, student_t7_standardized, laplace_standardized };

std::string_view to_string(DataDist dist);
/// Accepts "gaussian", "t7", "laplace" and the long tag names.
DataDist parse_data_dist(std::string_view text);

double sample_entry(DataDist dist, RngStream& rng);

/// Φ(x), accurate to ~1e-16 absolute.
double std_normal_cdf(double x);
/// 1 - Φ(x) without cancellation in the upper tail.
double std_normal_sf(double x);

/// Closed-form χ²₄ CDF: 1 - e^{-x/2}(1 + x/2).
double chi2_4_cdf(double x);
/// Inverse of chi2_4_cdf on (0, 1). Domain error outside that interval.
double chi2_4_quantile(double prob);

}  // namespace covtest
