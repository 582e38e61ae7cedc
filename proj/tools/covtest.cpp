#include "covtest/error.hpp"
#include "covtest/fisher.hpp"
#include "covtest/io.hpp"
#include "covtest/sim.hpp"
#include "covtest/validate.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kUsage = 2, kNumerical = 3 };

struct Options {
  std::string sample1;
  std::string sample2;
  bool has_header = false;
  char delimiter = ',';
  std::size_t m = 1;
  double alpha = 0.05;
  std::size_t draws = 10000;
  std::uint64_t seed = 0;
  std::string model = "m1";
  std::string delta_grid = "0";
  std::string dist = "gaussian";
  std::string methods;
  std::size_t reps = 500;
  std::size_t p = 200;
  std::size_t n = 100;
  std::string out;
  std::string format;
  std::size_t workers = 1;
  std::vector<std::string> suites;
  std::string inject_fault;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t cut = text.find(sep, start);
    std::string piece = text.substr(start, cut == std::string::npos ? std::string::npos : cut - start);
    if (!piece.empty()) parts.push_back(piece);
    if (cut == std::string::npos) break;
    start = cut + 1;
  }
  return parts;
}

std::vector<double> parse_delta_grid(const std::string& text) {
  std::vector<double> deltas;
  for (const std::string& piece : split(text, ',')) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) {
      throw covtest::Error(covtest::ErrorKind::config, "bad --delta-grid entry '" + piece + "'");
    }
    deltas.push_back(value);
  }
  if (deltas.empty()) throw covtest::Error(covtest::ErrorKind::config, "--delta-grid is empty");
  return deltas;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("COVTEST_SEED");
  if (env == nullptr || *env == '\0') return 0;
  const std::string text(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw covtest::Error(covtest::ErrorKind::config, "COVTEST_SEED is not an unsigned integer: '" + text + "'");
  }
  return seed;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw covtest::Error(covtest::ErrorKind::io, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw covtest::Error(covtest::ErrorKind::io, "error while writing '" + path + "'");
}

int cmd_run(const Options& o) {
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) {
    throw covtest::Error(covtest::ErrorKind::config, "--alpha must lie in (0, 1)");
  }
  const covtest::OutputFormat format =
      covtest::parse_output_format(o.format.empty() ? "json" : o.format);
  const covtest::SampleMatrix x1 =
      covtest::read_matrix({o.sample1, o.delimiter, o.has_header});
  const covtest::SampleMatrix x2 =
      covtest::read_matrix({o.sample2, o.delimiter, o.has_header});
  covtest::RngStream rng(o.seed, 0);
  const covtest::TestOutcome outcome = covtest::run_test(x1, x2, o.m, o.alpha, o.draws, rng);
  const std::string text = covtest::write_outcome(outcome, format);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
  return kOk;
}

int cmd_simulate(const Options& o) {
  covtest::SimConfig config;
  config.model = covtest::parse_model_id(o.model);
  config.deltas = parse_delta_grid(o.delta_grid);
  config.dist = covtest::parse_data_dist(o.dist);
  config.p = o.p;
  config.n = o.n;
  config.reps = o.reps;
  config.alpha = o.alpha;
  config.draws = o.draws;
  config.master_seed = o.seed;
  config.workers = o.workers;
  const std::string methods = o.methods.empty()
                                  ? "fc_" + std::to_string(o.m) + ",lc_only,eigen_only_" +
                                        std::to_string(o.m)
                                  : o.methods;
  config.methods.clear();
  for (const std::string& tag : split(methods, ',')) {
    config.methods.push_back(covtest::parse_method(tag, o.m));
  }
  const std::string format = o.format.empty() ? "text" : o.format;
  if (format != "text" && format != "csv" && format != "json") {
    throw covtest::Error(covtest::ErrorKind::config, "unknown --format '" + format + "'");
  }

  const covtest::SimReport report = covtest::rejection_curve(config);
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";

  const std::string csv = covtest::report_csv(report);
  const std::string json = covtest::report_json(report);
  const std::string prefix = o.out.empty() ? "covtest_sim" : o.out;
  write_file(prefix + ".csv", csv);
  write_file(prefix + ".json", json);

  if (format == "csv") {
    std::cout << csv;
  } else if (format == "json") {
    std::cout << json;
  } else {
    for (const covtest::SimCell& cell : report.cells) {
      std::cout << covtest::to_string(config.model) << " delta=" << covtest::format_double(cell.delta)
                << " method=" << covtest::to_string(cell.method) << " reps=" << cell.reps
                << " rate=" << covtest::format_double(cell.rate) << "\n";
    }
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  std::vector<std::string> suites;
  for (const std::string& s : o.suites) {
    for (const std::string& piece : split(s, ',')) suites.push_back(piece);
  }
  const std::vector<covtest::SuiteReport> reports = covtest::run_validation(suites, o.inject_fault);
  bool all_passed = true;
  for (const covtest::SuiteReport& r : reports) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks)";
    if (!r.passed) std::cout << ": " << r.failure;
    std::cout << "\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Two-sample test for equality of high-dimensional covariance matrices"};
  app.require_subcommand(1);

  try {
    o.seed = default_seed();
  } catch (const covtest::Error& e) {
    std::cerr << "covtest: " << e.what() << "\n";
    return kUsage;
  }

  const auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--m", o.m, "Number of leading spikes compared")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o.alpha, "Nominal level in (0, 1)")->capture_default_str();
    sub->add_option("--mc-draws", o.draws, "Monte-Carlo draws for the m > 1 spike p-value")
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Master seed (default: $COVTEST_SEED, else 0)")
        ->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "Test H0: Sigma1 = Sigma2 on two data files");
  run->add_option("--sample1", o.sample1, "First sample, rows are observations")->required();
  run->add_option("--sample2", o.sample2, "Second sample, same shape as the first")->required();
  add_common(run);
  run->add_flag("--has-header", o.has_header, "Skip the first non-blank line of each file");
  run->add_option("--delimiter", o.delimiter, "Field separator")->capture_default_str();
  run->add_option("--format", o.format, "Output format {json|text|csv} (default json)");
  run->add_option("--out", o.out, "Write the outcome to this file instead of stdout");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte-Carlo rejection rates over a delta grid");
  add_common(simulate);
  simulate->add_option("--model", o.model, "Covariance model {m1|m2|m3|m4|m5}")
      ->capture_default_str();
  simulate->add_option("--delta-grid", o.delta_grid, "Comma-separated delta values")
      ->capture_default_str();
  simulate->add_option("--dist", o.dist, "Entry distribution {gaussian|t7|laplace}")
      ->capture_default_str();
  simulate->add_option("--methods", o.methods,
                       "Comma-separated methods among fc_<m>, lc_only, eigen_only_<m> "
                       "(default fc_<m>,lc_only,eigen_only_<m>)");
  simulate->add_option("--reps", o.reps, "Replications per delta")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--p", o.p, "Dimension")->capture_default_str();
  simulate->add_option("--n", o.n, "Observations per sample")->capture_default_str();
  simulate->add_option("--workers", o.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", o.out, "Output prefix; writes PREFIX.csv and PREFIX.json (default covtest_sim)");
  simulate->add_option("--format", o.format, "Stdout summary format {text|csv|json} (default text)");

  CLI::App* validate = app.add_subcommand("validate", "Run the embedded validation suites");
  validate->add_option("--suite", o.suites, "Restrict to suites {ustat,theta,psi,eigen,dist}");
  validate->add_option("--inject-fault", o.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (simulate->parsed()) return cmd_simulate(o);
    return cmd_validate(o);
  } catch (const covtest::Error& e) {
    std::cerr << "covtest: " << e.what() << "\n";
    return covtest::is_numerical(e.kind()) ? kNumerical : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "covtest: " << e.what() << "\n";
    return kUsage;
  }
}
