#pragma once

#include "covtest/dist.hpp"
#include "covtest/fisher.hpp"
#include "covtest/matrix.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace covtest {

/// Diagonal covariance families. Sample 1 always uses delta = 0, so every
/// model reduces to the null at delta = 0.
///
///   m1: (10+δ, 7×10, 1×(p-11))
///   m2: (11, 7, 7, 7, (1+δ/20)×(p-4)/2, (1-δ/20)×(p-4)/2)
///   m3: (10+δ, 8+δ, 7+δ, 6×8, 1×(p-11))
///   m4: (20+δ, 15+δ, 13+δ, 12, d_5…d_p),  d_i = 3 - 2.5/(p-5)·(i-5)
///   m5: (10+δ, 7+δ, 7+δ, 7×8, 1×(p-11))
enum class ModelId { m1, m2, m3, m4, m5 };

std::string_view to_string(ModelId model);
/// Config error for an unknown tag.
ModelId parse_model_id(std::string_view text);

struct CovModelSpec {
  ModelId model = ModelId::m1;
  double delta = 0.0;
  std::size_t p = 200;
  std::size_t n = 100;
  DataDist dist = DataDist::gaussian;
  int which_sample = 2;  ///< 1 ignores delta
};

/// Config error when the model cannot be realised: p too small for the
/// model, odd p - 4 for m2, negative delta, delta ≥ 20 for m2, n < 4.
void validate_model(const CovModelSpec& spec);

/// Diagonal of Σ for the model (validated first).
Vector model_diagonal(const CovModelSpec& spec);
Matrix model_sigma(const CovModelSpec& spec);

/// n rows of Σ^{1/2} z with i.i.d. standardized entries z. Only the
/// diagonal of `sigma` is used; domain error on a negative entry.
SampleMatrix generate_sample(const Vector& sigma_diagonal, std::size_t n, DataDist dist,
                             RngStream& rng);
/// Domain error when `sigma` has a nonzero off-diagonal entry.
SampleMatrix generate_sample(const Matrix& sigma, std::size_t n, DataDist dist, RngStream& rng);

enum class MethodKind { fc, lc_only, eigen_only };

/// fc_<m> is the combined test, lc_only the Frobenius detector alone and
/// eigen_only_<m> the spike detector alone.
struct Method {
  MethodKind kind = MethodKind::fc;
  std::size_t m = 1;

  friend bool operator==(const Method&, const Method&) = default;
};

std::string to_string(const Method& method);
/// Accepts fc_<m>, eigen_only_<m>, lc_only, and bare fc / eigen_only (which
/// take `default_m`). Config error otherwise.
Method parse_method(std::string_view text, std::size_t default_m = 1);

struct SimConfig {
  ModelId model = ModelId::m1;
  std::vector<double> deltas{0.0};
  std::vector<Method> methods{Method{}};
  DataDist dist = DataDist::gaussian;
  std::size_t p = 200;
  std::size_t n = 100;
  std::size_t reps = 500;
  double alpha = 0.05;
  std::size_t draws = 10000;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
};

/// All statistics from one replication. Methods are evaluated on the same
/// pair of samples.
struct ReplicationResult {
  FrobeniusStat frob;
  std::vector<EigenStat> eigen;      ///< one per distinct spike count, ascending m
  std::vector<bool> reject;          ///< parallel to SimConfig::methods
  std::vector<TestOutcome> combined; ///< parallel to `eigen`
};

/// Stream id of replication r in the cell with this delta:
/// hash32(model|delta|dist|p|n)·2³² + r.
std::uint64_t replication_stream(const SimConfig& config, double delta, std::size_t r);

/// Runs replication r of the delta cell on its own RngStream.
ReplicationResult run_replication(const SimConfig& config, double delta, std::size_t r);

struct SimCell {
  double delta = 0.0;
  Method method;
  std::size_t reps = 0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double runtime_seconds = 0.0;  ///< summed over the cell's replications
};

struct SimReport {
  SimConfig config;
  std::vector<SimCell> cells;  ///< delta-major, methods in config order
  std::vector<std::string> warnings;
};

/// Empirical rejection rates over the delta grid. Replications fan out over
/// `config.workers` threads and are folded in cell/replication order, so the
/// report (runtimes aside) does not depend on the worker count. A failed
/// replication aborts the whole curve with an error naming the cell.
SimReport rejection_curve(const SimConfig& config);

/// Columns: model, delta, method, dist, p, n, reps, rate.
std::string report_csv(const SimReport& report);
/// Config echo, per-cell rates and runtimes.
std::string report_json(const SimReport& report);

}  // namespace covtest
