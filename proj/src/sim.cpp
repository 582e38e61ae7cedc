#include "covtest/sim.hpp"

#include "covtest/error.hpp"
#include "covtest/frobenius.hpp"
#include "covtest/io.hpp"
#include "covtest/spike.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

namespace covtest {

namespace {

constexpr std::uint64_t kMonteCarloSeedMix = 0x9E3779B97F4A7C15ull;
constexpr std::size_t kLargeDimension = 500;

std::size_t min_dimension(ModelId model) {
  switch (model) {
    case ModelId::m1:
    case ModelId::m3:
    case ModelId::m5: return 11;
    case ModelId::m2: return 6;
    case ModelId::m4: return 6;
  }
  return 0;
}

std::uint32_t fnv1a32(std::string_view text) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::vector<std::size_t> spike_counts(const std::vector<Method>& methods) {
  std::vector<std::size_t> counts;
  for (const Method& m : methods) {
    if (m.kind != MethodKind::lc_only) counts.push_back(m.m);
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  return counts;
}

std::string cell_label(const SimConfig& c, double delta) {
  std::ostringstream out;
  out << "model=" << to_string(c.model) << " delta=" << format_double(delta)
      << " dist=" << to_string(c.dist) << " p=" << c.p << " n=" << c.n;
  return out.str();
}

void validate_config(const SimConfig& c) {
  if (c.reps < 1) throw Error(ErrorKind::config, "simulate: reps must be at least 1");
  if (c.deltas.empty()) throw Error(ErrorKind::config, "simulate: empty delta grid");
  if (c.methods.empty()) throw Error(ErrorKind::config, "simulate: no methods requested");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    throw Error(ErrorKind::config, "simulate: alpha must lie in (0, 1)");
  }
  for (const Method& m : c.methods) {
    if (m.m < 1 || m.m > c.p) {
      throw Error(ErrorKind::config, "simulate: method " + to_string(m) + " needs 1 <= m <= p");
    }
    if (m.kind != MethodKind::lc_only && m.m > 1 && c.draws < kMinMonteCarloDraws) {
      throw Error(ErrorKind::config, "simulate: at least " +
                                         std::to_string(kMinMonteCarloDraws) +
                                         " Monte-Carlo draws are required for m > 1");
    }
  }
  for (double d : c.deltas) {
    validate_model(CovModelSpec{c.model, d, c.p, c.n, c.dist, 2});
  }
}

}  // namespace

std::string_view to_string(ModelId model) {
  switch (model) {
    case ModelId::m1: return "m1";
    case ModelId::m2: return "m2";
    case ModelId::m3: return "m3";
    case ModelId::m4: return "m4";
    case ModelId::m5: return "m5";
  }
  return "unknown";
}

ModelId parse_model_id(std::string_view text) {
  if (text == "m1") return ModelId::m1;
  if (text == "m2") return ModelId::m2;
  if (text == "m3") return ModelId::m3;
  if (text == "m4") return ModelId::m4;
  if (text == "m5") return ModelId::m5;
  throw Error(ErrorKind::config, "unknown model '" + std::string(text) + "' (expected m1..m5)");
}

void validate_model(const CovModelSpec& spec) {
  const std::string name(to_string(spec.model));
  if (spec.p < min_dimension(spec.model)) {
    throw Error(ErrorKind::config, "model " + name + " needs p >= " +
                                       std::to_string(min_dimension(spec.model)) + ", got " +
                                       std::to_string(spec.p));
  }
  if (spec.n < 4) throw Error(ErrorKind::config, "model " + name + " needs n >= 4");
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) {
    throw Error(ErrorKind::config, "model " + name + ": delta must be finite and >= 0");
  }
  if (spec.which_sample != 1 && spec.which_sample != 2) {
    throw Error(ErrorKind::config, "model " + name + ": sample must be 1 or 2");
  }
  if (spec.model == ModelId::m2) {
    if ((spec.p - 4) % 2 != 0) {
      throw Error(ErrorKind::config, "model m2 needs p - 4 even, got p = " + std::to_string(spec.p));
    }
    if (!(spec.delta < 20.0)) {
      throw Error(ErrorKind::config, "model m2 needs delta < 20 to keep the bulk positive");
    }
  }
}

Vector model_diagonal(const CovModelSpec& spec) {
  validate_model(spec);
  const auto p = static_cast<Eigen::Index>(spec.p);
  const double d = spec.which_sample == 1 ? 0.0 : spec.delta;
  Vector diag = Vector::Ones(p);
  switch (spec.model) {
    case ModelId::m1:
      diag(0) = 10.0 + d;
      diag.segment(1, 10).setConstant(7.0);
      break;
    case ModelId::m2: {
      diag.head(4) << 11.0, 7.0, 7.0, 7.0;
      const Eigen::Index half = (p - 4) / 2;
      diag.segment(4, half).setConstant(1.0 + d / 20.0);
      diag.tail(half).setConstant(1.0 - d / 20.0);
      break;
    }
    case ModelId::m3:
      diag.head(3) << 10.0 + d, 8.0 + d, 7.0 + d;
      diag.segment(3, 8).setConstant(6.0);
      break;
    case ModelId::m4: {
      diag.head(4) << 20.0 + d, 15.0 + d, 13.0 + d, 12.0;
      const double span = static_cast<double>(spec.p - 5);
      for (Eigen::Index i = 5; i <= p; ++i) {
        diag(i - 1) = 3.0 - 2.5 / span * static_cast<double>(i - 5);
      }
      break;
    }
    case ModelId::m5:
      diag.head(3) << 10.0 + d, 7.0 + d, 7.0 + d;
      diag.segment(3, 8).setConstant(7.0);
      break;
  }
  return diag;
}

Matrix model_sigma(const CovModelSpec& spec) { return model_diagonal(spec).asDiagonal(); }

SampleMatrix generate_sample(const Vector& sigma_diagonal, std::size_t n, DataDist dist,
                             RngStream& rng) {
  if (n == 0 || sigma_diagonal.size() == 0) {
    throw Error(ErrorKind::dimension, "generate_sample: need n >= 1 and p >= 1");
  }
  if (!(sigma_diagonal.array() >= 0.0).all() || !all_finite(sigma_diagonal)) {
    throw Error(ErrorKind::domain, "generate_sample: covariance diagonal must be finite and >= 0");
  }
  const Vector scale = sigma_diagonal.cwiseSqrt();
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix x(rows, scale.size());
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < scale.size(); ++j) x(i, j) = scale(j) * sample_entry(dist, rng);
  return SampleMatrix(std::move(x));
}

SampleMatrix generate_sample(const Matrix& sigma, std::size_t n, DataDist dist, RngStream& rng) {
  if (sigma.rows() != sigma.cols()) {
    throw Error(ErrorKind::dimension, "generate_sample: covariance must be square");
  }
  Matrix off = sigma;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorKind::domain, "generate_sample: covariance must be diagonal");
  }
  return generate_sample(Vector(sigma.diagonal()), n, dist, rng);
}

std::string to_string(const Method& method) {
  switch (method.kind) {
    case MethodKind::fc: return "fc_" + std::to_string(method.m);
    case MethodKind::lc_only: return "lc_only";
    case MethodKind::eigen_only: return "eigen_only_" + std::to_string(method.m);
  }
  return "unknown";
}

Method parse_method(std::string_view text, std::size_t default_m) {
  const auto with_count = [&](MethodKind kind, std::string_view prefix) -> std::optional<Method> {
    if (text == prefix) return Method{kind, default_m};
    if (text.size() <= prefix.size() + 1 || text.substr(0, prefix.size()) != prefix ||
        text[prefix.size()] != '_') {
      return std::nullopt;
    }
    const std::string_view digits = text.substr(prefix.size() + 1);
    std::size_t m = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || m < 1) return std::nullopt;
    return Method{kind, m};
  };
  if (text == "lc_only") return Method{MethodKind::lc_only, 1};
  if (auto m = with_count(MethodKind::eigen_only, "eigen_only")) return *m;
  if (auto m = with_count(MethodKind::fc, "fc")) return *m;
  throw Error(ErrorKind::config, "unknown method '" + std::string(text) +
                                     "' (expected fc_<m>, lc_only or eigen_only_<m>)");
}

std::uint64_t replication_stream(const SimConfig& config, double delta, std::size_t r) {
  std::ostringstream key;
  key << to_string(config.model) << '|' << format_double(delta) << '|' << to_string(config.dist)
      << '|' << config.p << '|' << config.n;
  return (static_cast<std::uint64_t>(fnv1a32(key.str())) << 32) + static_cast<std::uint64_t>(r);
}

ReplicationResult run_replication(const SimConfig& config, double delta, std::size_t r) {
  const std::uint64_t stream = replication_stream(config, delta, r);
  try {
    RngStream rng(config.master_seed, stream);
    const Vector sigma1 =
        model_diagonal(CovModelSpec{config.model, delta, config.p, config.n, config.dist, 1});
    const Vector sigma2 =
        model_diagonal(CovModelSpec{config.model, delta, config.p, config.n, config.dist, 2});
    const SampleMatrix x1 = generate_sample(sigma1, config.n, config.dist, rng);
    const SampleMatrix x2 = generate_sample(sigma2, config.n, config.dist, rng);

    ReplicationResult out;
    try {
      out.frob = frobenius_test(x1, x2);
    } catch (const Error& e) {
      throw e.with_stage("frobenius");
    }

    const std::vector<std::size_t> counts = spike_counts(config.methods);
    if (!counts.empty()) {
      const std::size_t spikes = counts.back();
      std::optional<SpectrumSummary> spec1;
      std::optional<SpectrumSummary> spec2;
      try {
        spec1 = compute_spectrum(x1);
        spec2 = compute_spectrum(x2);
      } catch (const Error& e) {
        throw e.with_stage("spectrum");
      }
      std::optional<SpikeEstimates> est1;
      std::optional<SpikeEstimates> est2;
      try {
        est1 = estimate_spikes(x1, *spec1, spikes);
        est2 = estimate_spikes(x2, *spec2, spikes);
      } catch (const Error& e) {
        throw e.with_stage("estimators");
      }
      for (std::size_t m : counts) {
        try {
          const SpikeCovariance cov = spike_sigma_hat(*est1, *est2, m);
          if (m == 1) {
            out.eigen.push_back(eigen_stat_single(*spec1, *spec2, cov));
          } else {
            RngStream mc(config.master_seed ^ (kMonteCarloSeedMix * m), stream);
            out.eigen.push_back(eigen_stat_multi(*spec1, *spec2, cov, m, config.draws, mc));
          }
        } catch (const Error& e) {
          throw e.with_stage("eigen_stat");
        }
        try {
          out.combined.push_back(combine(out.frob, out.eigen.back(), config.alpha));
        } catch (const Error& e) {
          throw e.with_stage("fisher");
        }
      }
    }

    const auto slot = [&](std::size_t m) {
      return static_cast<std::size_t>(std::lower_bound(counts.begin(), counts.end(), m) -
                                      counts.begin());
    };
    for (const Method& method : config.methods) {
      switch (method.kind) {
        case MethodKind::fc:
          out.reject.push_back(out.combined[slot(method.m)].reject);
          break;
        case MethodKind::lc_only:
          out.reject.push_back(out.frob.p1 < config.alpha);
          break;
        case MethodKind::eigen_only:
          out.reject.push_back(out.eigen[slot(method.m)].p2 < config.alpha);
          break;
      }
    }
    return out;
  } catch (const Error& e) {
    throw Error(e.kind(),
                cell_label(config, delta) + " replication " + std::to_string(r) + " (stream " +
                    std::to_string(stream) + "): " + e.detail(),
                e.stage());
  }
}

SimReport rejection_curve(const SimConfig& config) {
  validate_config(config);
  SimReport report;
  report.config = config;
  if (config.p >= kLargeDimension) {
    report.warnings.push_back("p = " + std::to_string(config.p) +
                              " is beyond desk scale; expect long runtimes");
  }

  struct JobResult {
    std::vector<bool> reject;
    double seconds = 0.0;
    std::exception_ptr error;
  };
  const std::size_t cells = config.deltas.size();
  const std::size_t jobs = cells * config.reps;
  std::vector<JobResult> results(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  const auto worker = [&] {
    while (!failed.load()) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      const double delta = config.deltas[j / config.reps];
      const std::size_t r = j % config.reps;
      const auto start = std::chrono::steady_clock::now();
      try {
        results[j].reject = run_replication(config, delta, r).reject;
      } catch (...) {
        results[j].error = std::current_exception();
        failed.store(true);
      }
      results[j].seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(jobs, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Jobs are claimed in index order, so the lowest failing index is the
  // same for every worker count.
  for (const JobResult& res : results) {
    if (res.error) std::rethrow_exception(res.error);
  }

  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      SimCell cell;
      cell.delta = config.deltas[c];
      cell.method = config.methods[k];
      cell.reps = config.reps;
      for (std::size_t r = 0; r < config.reps; ++r) {
        const JobResult& res = results[c * config.reps + r];
        if (res.reject[k]) ++cell.rejections;
        cell.runtime_seconds += res.seconds;
      }
      cell.rate = static_cast<double>(cell.rejections) / static_cast<double>(cell.reps);
      report.cells.push_back(cell);
    }
  }
  return report;
}

std::string report_csv(const SimReport& report) {
  const SimConfig& c = report.config;
  std::ostringstream out;
  out << "model,delta,method,dist,p,n,reps,rate\n";
  for (const SimCell& cell : report.cells) {
    out << to_string(c.model) << ',' << format_double(cell.delta) << ','
        << to_string(cell.method) << ',' << to_string(c.dist) << ',' << c.p << ',' << c.n << ','
        << cell.reps << ',' << format_double(cell.rate) << '\n';
  }
  return out.str();
}

std::string report_json(const SimReport& report) {
  using nlohmann::json;
  const SimConfig& c = report.config;
  std::vector<std::string> methods;
  std::size_t max_m = 1;
  for (const Method& m : c.methods) {
    methods.push_back(to_string(m));
    max_m = std::max(max_m, m.m);
  }
  json j;
  j["config"] = {{"model", std::string(to_string(c.model))},
                 {"deltas", c.deltas},
                 {"methods", methods},
                 {"dist", std::string(to_string(c.dist))},
                 {"p", c.p},
                 {"n", c.n},
                 {"reps", c.reps},
                 {"alpha", c.alpha},
                 {"m", max_m},
                 {"draws", c.draws},
                 {"master_seed", c.master_seed},
                 {"workers", c.workers}};
  json cells = json::array();
  for (const SimCell& cell : report.cells) {
    cells.push_back({{"delta", cell.delta},
                     {"method", to_string(cell.method)},
                     {"reps", cell.reps},
                     {"rejections", cell.rejections},
                     {"rate", cell.rate},
                     {"runtime_seconds", cell.runtime_seconds}});
  }
  j["cells"] = std::move(cells);
  j["warnings"] = report.warnings;
  j["versions"] = {{"covtest", std::string(kVersion)}};
  return j.dump(2) + "\n";
}

}  // namespace covtest
