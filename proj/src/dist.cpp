#include "covtest/dist.hpp"

#include "covtest/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace covtest {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  const std::array<std::uint32_t, 5> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
      0x636f7674u};
  return std::seed_seq(words.begin(), words.end());
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seed_seq(seed, stream);
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

std::string_view to_string(DataDist dist) {
  switch (dist) {
    case DataDist::gaussian: return "gaussian";
    case DataDist::student_t7_standardized: return "t7";
    case DataDist::laplace_standardized: return "laplace";
  }
  return "unknown";
}

DataDist parse_data_dist(std::string_view text) {
  if (text == "gaussian" || text == "normal") return DataDist::gaussian;
  if (text == "t7" || text == "student_t7_standardized") return DataDist::student_t7_standardized;
  if (text == "laplace" || text == "laplace_standardized") return DataDist::laplace_standardized;
  throw Error(ErrorKind::config, "unknown data distribution '" + std::string(text) +
                                     "' (expected gaussian, t7 or laplace)");
}

double sample_entry(DataDist dist, RngStream& rng) {
  switch (dist) {
    case DataDist::gaussian:
      return rng.normal();
    case DataDist::student_t7_standardized:
      // Var(t7) = 7/5.
      return rng.student_t7() / std::sqrt(7.0 / 5.0);
    case DataDist::laplace_standardized: {
      // Laplace(0, b) has variance 2b², so b = 1/√2.
      const double magnitude = rng.exponential() / std::sqrt(2.0);
      return rng.coin() ? magnitude : -magnitude;
    }
  }
  throw Error(ErrorKind::config, "unknown data distribution");
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double chi2_4_cdf(double x) {
  if (x <= 0.0) return 0.0;
  // 1 - e^{-h}(1+h) = -expm1(-h) - h e^{-h}; the second form keeps precision
  // for small x.
  const double h = 0.5 * x;
  return -std::expm1(-h) - h * std::exp(-h);
}

double chi2_4_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw Error(ErrorKind::domain, "chi2_4_quantile: probability must lie in (0, 1)");
  }
  // Newton on F(x) - prob with a bisection safeguard. F is increasing with
  // density f(x) = (x/4) e^{-x/2}.
  double lo = 0.0;
  double hi = 8.0;
  while (chi2_4_cdf(hi) < prob) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double residual = chi2_4_cdf(x) - prob;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double density = 0.25 * x * std::exp(-0.5 * x);
    double next = density > 0.0 ? x - residual / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace covtest
