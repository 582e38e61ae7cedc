#include "covtest/error.hpp"
#include "covtest/fisher.hpp"
#include "covtest/frobenius.hpp"
#include "covtest/io.hpp"
#include "covtest/sim.hpp"
#include "covtest/spike.hpp"
#include "covtest/theory.hpp"
#include "covtest/validate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace covtest;

namespace {

py::dict outcome_dict(const TestOutcome& o) {
  py::dict d;
  d["t1"] = o.frob.t1;
  d["p1"] = o.frob.p1;
  if (o.eigen.t2) d["t2"] = *o.eigen.t2;
  if (o.eigen.t2m) d["t2m"] = *o.eigen.t2m;
  d["p2"] = o.eigen.p2;
  d["t_fc"] = o.t_fc;
  d["q"] = o.q;
  d["alpha"] = o.alpha;
  d["m"] = o.m;
  d["reject"] = o.reject;
  d["seed"] = o.seed;
  d["diagnostics"] = o.diagnostics;
  d["b1"] = o.frob.b1;
  d["b2"] = o.frob.b2;
  d["c"] = o.frob.c;
  d["sigma1_hat"] = o.frob.sigma1_hat;
  return d;
}

BulkSpectrum make_bulk(const std::string& kind, const std::vector<double>& params, double y) {
  const auto need = [&](std::size_t count) {
    if (params.size() != count) {
      throw Error(ErrorKind::config, "bulk '" + kind + "' takes " + std::to_string(count) +
                                         " parameter(s)");
    }
  };
  if (kind == "point_mass") {
    need(1);
    return BulkSpectrum::point_mass(params[0], y);
  }
  if (kind == "two_point") {
    need(2);
    return BulkSpectrum::two_point(params[0], params[1], y);
  }
  if (kind == "uniform") {
    need(2);
    return BulkSpectrum::uniform(params[0], params[1], y);
  }
  if (kind == "empirical") return BulkSpectrum::empirical(params, y);
  throw Error(ErrorKind::config, "unknown bulk kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_covtest, m) {
  m.doc() = "Two-sample test for equality of high-dimensional covariance matrices";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<Error>(m, "CovtestError", PyExc_ValueError);

  m.def(
      "run_test",
      [](const Matrix& x1, const Matrix& x2, std::size_t spikes, double alpha, std::size_t draws,
         std::uint64_t seed) {
        RngStream rng(seed, 0);
        return outcome_dict(run_test(SampleMatrix(x1), SampleMatrix(x2), spikes, alpha, draws, rng));
      },
      py::arg("x1"), py::arg("x2"), py::arg("m") = 1, py::arg("alpha") = 0.05,
      py::arg("draws") = 10000, py::arg("seed") = 0,
      "Combined test on two n x p samples; returns the outcome as a dict.");

  m.def("b_stat", [](const Matrix& x) { return b_stat_fast(SampleMatrix(x)); }, py::arg("x"));
  m.def("b_stat_naive", [](const Matrix& x) { return b_stat_naive(SampleMatrix(x)); },
        py::arg("x"));
  m.def("c_stat",
        [](const Matrix& x1, const Matrix& x2) {
          return c_stat_fast(SampleMatrix(x1), SampleMatrix(x2));
        },
        py::arg("x1"), py::arg("x2"));
  m.def("c_stat_naive",
        [](const Matrix& x1, const Matrix& x2) {
          return c_stat_naive(SampleMatrix(x1), SampleMatrix(x2));
        },
        py::arg("x1"), py::arg("x2"));

  m.def("sample_eigenvalues",
        [](const Matrix& x) { return Vector(compute_spectrum(SampleMatrix(x)).eigenvalues); },
        py::arg("x"), "Non-increasing eigenvalues of the sample covariance (divisor n).");
  m.def("theta_roots",
        [](std::vector<double> eigenvalues, std::size_t n) {
          return theta_roots(spectrum_from_eigenvalues(std::move(eigenvalues), n));
        },
        py::arg("eigenvalues"), py::arg("n"));
  m.def(
      "spike_estimates",
      [](const Matrix& x, std::size_t spikes) {
        const SampleMatrix sample(x);
        const SpikeEstimates e = estimate_spikes(sample, compute_spectrum(sample), spikes);
        py::dict d;
        d["alpha_hat"] = e.alpha_hat;
        d["xi_hat"] = e.xi_hat;
        d["gamma4_hat"] = e.gamma4_hat;
        d["kappa_hat"] = e.kappa_hat;
        return d;
      },
      py::arg("x"), py::arg("spikes") = 1);

  m.def("psi",
        [](const std::string& kind, const std::vector<double>& params, double y, double alpha) {
          return psi(make_bulk(kind, params, y), alpha);
        },
        py::arg("kind"), py::arg("params"), py::arg("y"), py::arg("alpha"));
  m.def("psi_prime",
        [](const std::string& kind, const std::vector<double>& params, double y, double alpha) {
          return psi_prime(make_bulk(kind, params, y), alpha);
        },
        py::arg("kind"), py::arg("params"), py::arg("y"), py::arg("alpha"));

  m.def("chi2_4_quantile", &chi2_4_quantile, py::arg("prob"));

  m.def(
      "model_diagonal",
      [](const std::string& model, double delta, std::size_t p, int which_sample) {
        return model_diagonal(
            CovModelSpec{parse_model_id(model), delta, p, 100, DataDist::gaussian, which_sample});
      },
      py::arg("model"), py::arg("delta"), py::arg("p"), py::arg("which_sample") = 2);
  m.def(
      "generate_sample",
      [](const Vector& sigma_diagonal, std::size_t n, const std::string& dist, std::uint64_t seed,
         std::uint64_t stream) {
        RngStream rng(seed, stream);
        return Matrix(generate_sample(sigma_diagonal, n, parse_data_dist(dist), rng).values());
      },
      py::arg("sigma_diagonal"), py::arg("n"), py::arg("dist") = "gaussian", py::arg("seed") = 0,
      py::arg("stream") = 0);

  m.def(
      "simulate",
      [](const std::string& model, const std::vector<double>& deltas,
         const std::vector<std::string>& methods, const std::string& dist, std::size_t p,
         std::size_t n, std::size_t reps, double alpha, std::size_t draws, std::uint64_t seed,
         std::size_t workers) {
        SimConfig config;
        config.model = parse_model_id(model);
        config.deltas = deltas;
        config.methods.clear();
        for (const std::string& tag : methods) config.methods.push_back(parse_method(tag));
        config.dist = parse_data_dist(dist);
        config.p = p;
        config.n = n;
        config.reps = reps;
        config.alpha = alpha;
        config.draws = draws;
        config.master_seed = seed;
        config.workers = workers;
        SimReport report;
        {
          py::gil_scoped_release release;
          report = rejection_curve(config);
        }
        return report_csv(report);
      },
      py::arg("model"), py::arg("deltas"), py::arg("methods") = std::vector<std::string>{"fc_1"},
      py::arg("dist") = "gaussian", py::arg("p") = 200, py::arg("n") = 100, py::arg("reps") = 500,
      py::arg("alpha") = 0.05, py::arg("draws") = 10000, py::arg("seed") = 0,
      py::arg("workers") = 1, "Rejection-rate grid as CSV text.");

  m.def(
      "validate",
      [](const std::vector<std::string>& suites) {
        py::list out;
        for (const SuiteReport& r : run_validation(suites)) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["checks"] = r.checks;
          d["failure"] = r.failure;
          out.append(d);
        }
        return out;
      },
      py::arg("suites") = std::vector<std::string>{});
}
