#include "covtest/fisher.hpp"

#include "covtest/error.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace covtest {

namespace {

template <class F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

double floored(double p, const char* name, std::vector<std::string>& diagnostics) {
  if (p >= kPValueFloor) return p;
  std::ostringstream msg;
  msg << "p-value-floor: " << name << " = " << p << " raised to " << kPValueFloor;
  diagnostics.push_back(msg.str());
  return kPValueFloor;
}

}  // namespace

double fisher_statistic(double p1, double p2) {
  for (double p : {p1, p2}) {
    if (!(p > 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "fisher_statistic: p-value " << p << " outside (0, 1]";
      throw Error(ErrorKind::domain, msg.str());
    }
  }
  return -2.0 * std::log(p1) - 2.0 * std::log(p2);
}

Decision decide(double t_fc, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::domain, "decide: alpha must lie in (0, 1)");
  }
  Decision out;
  out.q = chi2_4_quantile(1.0 - alpha);
  out.reject = t_fc > out.q;
  return out;
}

TestOutcome combine(const FrobeniusStat& frob, const EigenStat& eigen, double alpha) {
  TestOutcome out;
  out.frob = frob;
  out.eigen = eigen;
  out.m = eigen.m;
  out.alpha = alpha;
  out.diagnostics = eigen.diagnostics;
  out.frob.p1 = floored(out.frob.p1, "p1", out.diagnostics);
  out.eigen.p2 = floored(out.eigen.p2, "p2", out.diagnostics);
  out.t_fc = fisher_statistic(out.frob.p1, out.eigen.p2);
  const Decision d = decide(out.t_fc, alpha);
  out.q = d.q;
  out.reject = d.reject;
  return out;
}

TestOutcome run_test(const SampleMatrix& x1, const SampleMatrix& x2, std::size_t m,
                     double alpha, std::size_t draws, RngStream& rng) {
  if (m < 1) throw Error(ErrorKind::config, "run_test: m must be at least 1", "input");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::domain, "run_test: alpha must lie in (0, 1)", "input");
  }

  const FrobeniusStat frob = in_stage("frobenius", [&] { return frobenius_test(x1, x2); });

  auto spectra = in_stage("spectrum", [&] {
    return std::make_pair(compute_spectrum(x1), compute_spectrum(x2));
  });
  const SpikeCovariance cov = in_stage("estimators", [&] {
    const SpikeEstimates e1 = estimate_spikes(x1, spectra.first, m);
    const SpikeEstimates e2 = estimate_spikes(x2, spectra.second, m);
    return spike_sigma_hat(e1, e2, m);
  });

  const EigenStat eigen = in_stage("eigen_stat", [&] {
    return m == 1 ? eigen_stat_single(spectra.first, spectra.second, cov)
                  : eigen_stat_multi(spectra.first, spectra.second, cov, m, draws, rng);
  });

  TestOutcome out = in_stage("fisher", [&] { return combine(frob, eigen, alpha); });
  out.seed = rng.seed();
  return out;
}

}  // namespace covtest
