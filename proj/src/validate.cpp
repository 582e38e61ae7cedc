#include "covtest/validate.hpp"

#include "covtest/dist.hpp"
#include "covtest/error.hpp"
#include "covtest/frobenius.hpp"
#include "covtest/matrix.hpp"
#include "covtest/spike.hpp"
#include "covtest/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace covtest {

namespace {

constexpr std::uint64_t kValidationSeed = 0x76616c6964617465ull;

// Collects checks for one suite and remembers the first failure.
class Checker {
 public:
  explicit Checker(std::string name) { report_.name = std::move(name); }

  void expect(bool ok, const std::function<std::string()>& describe) {
    ++report_.checks;
    if (!ok && report_.passed) {
      report_.passed = false;
      report_.failure = describe();
    }
  }

  SuiteReport finish() { return std::move(report_); }

 private:
  SuiteReport report_;
};

Matrix random_matrix(RngStream& rng, Eigen::Index rows, Eigen::Index cols, double shift) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal() + shift;
  return m;
}

std::size_t uniform_index(RngStream& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng.engine());
}

SuiteReport suite_ustat(double fault) {
  Checker check("ustat");
  RngStream rng(kValidationSeed, 1);
  for (int instance = 0; instance < 200; ++instance) {
    const auto n = static_cast<Eigen::Index>(uniform_index(rng, 4, 8));
    const auto p = static_cast<Eigen::Index>(uniform_index(rng, 1, 5));
    const SampleMatrix x1(random_matrix(rng, n, p, 0.5));
    const SampleMatrix x2(random_matrix(rng, n, p, -0.25));

    const double scale1 = x1.values().rowwise().squaredNorm().mean();
    const double scale2 = x2.values().rowwise().squaredNorm().mean();

    const double b_naive = b_stat_naive(x1);
    const double b_fast = b_stat_fast(x1) * (1.0 + fault);
    const double b_err = std::abs(b_fast - b_naive) / std::max(std::abs(b_naive), scale1 * scale1);
    check.expect(b_err <= 1e-10, [&] {
      std::ostringstream msg;
      msg << "b_stat fast vs naive, instance " << instance << ": relative error " << b_err;
      return msg.str();
    });

    const double c_naive = c_stat_naive(x1, x2);
    const double c_fast = c_stat_fast(x1, x2) * (1.0 + fault);
    const double c_err = std::abs(c_fast - c_naive) / std::max(std::abs(c_naive), scale1 * scale2);
    check.expect(c_err <= 1e-10, [&] {
      std::ostringstream msg;
      msg << "c_stat fast vs naive, instance " << instance << ": relative error " << c_err;
      return msg.str();
    });
  }
  return check.finish();
}

SuiteReport suite_theta(double fault) {
  Checker check("theta");
  RngStream rng(kValidationSeed, 2);
  for (int instance = 0; instance < 40; ++instance) {
    const std::size_t p = uniform_index(rng, 2, 50);
    const std::size_t n = uniform_index(rng, 2, 100);
    // Sample covariance spectrum of data with a random diagonal scale.
    Matrix x = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), 0.0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) *= 0.5 + 3.0 * rng.exponential();
    const SpectrumSummary spec = compute_spectrum(SampleMatrix(std::move(x)));
    std::vector<double> roots = theta_roots(spec);
    for (double& r : roots) r *= 1.0 + fault;

    check.expect(roots.size() == p, [&] {
      return "theta_roots returned " + std::to_string(roots.size()) + " roots for p = " +
             std::to_string(p);
    });
    for (std::size_t j = 0; j < roots.size() && j < p; ++j) {
      if (roots[j] == 0.0) continue;
      const double residual = std::abs(theta_equation_residual(spec, roots[j]));
      check.expect(residual < 1e-9, [&] {
        std::ostringstream msg;
        msg << "theta residual " << residual << " at root " << j << " of instance " << instance;
        return msg.str();
      });
      if (j + 1 < p) {
        const double upper = spec.eigenvalues(static_cast<Eigen::Index>(j));
        const double lower = spec.eigenvalues(static_cast<Eigen::Index>(j + 1));
        check.expect(roots[j] > lower && roots[j] < upper, [&] {
          std::ostringstream msg;
          msg << "root " << j << " = " << roots[j] << " not interlaced in (" << lower << ", "
              << upper << ") on instance " << instance;
          return msg.str();
        });
      }
    }
  }
  return check.finish();
}

SuiteReport suite_psi(double fault) {
  Checker check("psi");
  struct Family {
    std::string name;
    BulkSpectrum bulk;
    double top;
  };
  const std::vector<Family> families{
      {"point_mass", BulkSpectrum::point_mass(1.0, 2.0), 1.0},
      {"two_point", BulkSpectrum::two_point(1.5, 0.5, 2.0), 1.5},
      {"uniform", BulkSpectrum::uniform(0.5, 3.0, 10.0), 3.0},
      {"empirical", BulkSpectrum::empirical({2.0, 1.5, 1.0, 1.0, 0.5}, 0.5), 2.0},
  };
  constexpr double h = 1e-5;
  for (const Family& f : families) {
    for (int k = 0; k < 50; ++k) {
      const double alpha = f.top + 0.5 + 0.5 * k;
      const double fd = (psi(f.bulk, alpha + h) - psi(f.bulk, alpha - h)) / (2.0 * h);
      const double exact = psi_prime(f.bulk, alpha) * (1.0 + fault);
      const double err = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
      check.expect(err < 1e-6, [&] {
        std::ostringstream msg;
        msg << f.name << ": psi' vs finite difference at alpha = " << alpha << ", error " << err;
        return msg.str();
      });
    }
  }

  // Supercriticality boundary of the U[0.5, 3] bulk at y = 10.
  const BulkSpectrum uniform = BulkSpectrum::uniform(0.5, 3.0, 10.0);
  double lo = 3.0 + 1e-6;
  double hi = 50.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (psi_prime(uniform, mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  check.expect(std::abs(hi - 8.31816) < 1e-3, [&] {
    std::ostringstream msg;
    msg << "uniform(0.5, 3) boundary at y = 10 is " << hi << ", expected 8.31816";
    return msg.str();
  });

  for (double y : {0.25, 1.0, 4.0}) {
    const BulkSpectrum bulk = BulkSpectrum::point_mass(1.0, y);
    const double edge = 1.0 + std::sqrt(y);
    check.expect(is_supercritical(bulk, edge * 1.001) && !is_supercritical(bulk, edge * 0.999),
                 [&] { return "point_mass supercritical threshold differs from 1 + sqrt(y)"; });
  }
  return check.finish();
}

SuiteReport suite_eigen(double fault) {
  Checker check("eigen");
  RngStream rng(kValidationSeed, 4);
  for (int instance = 0; instance < 30; ++instance) {
    const auto size = static_cast<Eigen::Index>(uniform_index(rng, 1, 12));
    const Matrix g = random_matrix(rng, size, size, 0.0);
    const Matrix a = 0.5 * (g + g.transpose());
    SymEigen eig = sym_eigen(a);
    eig.values *= 1.0 + fault;
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    const double residual =
        (a * eig.vectors - eig.vectors * eig.values.asDiagonal()).cwiseAbs().maxCoeff();
    const double orth =
        (eig.vectors.transpose() * eig.vectors - Matrix::Identity(size, size)).cwiseAbs().maxCoeff();
    check.expect(residual <= 1e-10 * scale && orth <= 1e-10, [&] {
      std::ostringstream msg;
      msg << "sym_eigen instance " << instance << ": residual " << residual << ", orthogonality "
          << orth;
      return msg.str();
    });
    bool sorted = true;
    for (Eigen::Index j = 1; j < size; ++j) sorted = sorted && eig.values(j - 1) >= eig.values(j);
    check.expect(sorted, [&] { return "sym_eigen values not descending"; });

    // Rank-deficient PSD input must still factor after repair.
    const Matrix low = random_matrix(rng, size, std::max<Eigen::Index>(1, size / 2), 0.0);
    const Matrix psd = low * low.transpose();
    const CholeskyResult chol = cholesky_psd(psd);
    const double err = (chol.lower * chol.lower.transpose() - psd).cwiseAbs().maxCoeff();
    check.expect(err <= 1e-8 * (1.0 + psd.cwiseAbs().maxCoeff()), [&] {
      std::ostringstream msg;
      msg << "cholesky_psd reconstruction error " << err << " on instance " << instance;
      return msg.str();
    });
  }
  return check.finish();
}

SuiteReport suite_dist(double fault) {
  Checker check("dist");
  for (int k = 1; k < 100; ++k) {
    const double prob = k / 100.0;
    const double q = chi2_4_quantile(prob) * (1.0 + fault);
    const double err = std::abs(chi2_4_cdf(q) - prob);
    check.expect(err < 1e-13, [&] {
      std::ostringstream msg;
      msg << "chi2_4 quantile round trip at " << prob << ": error " << err;
      return msg.str();
    });
  }
  for (double x : {-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0}) {
    const double total = std_normal_cdf(x) + std_normal_sf(x);
    check.expect(std::abs(total - 1.0) < 1e-15, [&] {
      return "normal cdf and survival function do not sum to 1 at x = " + std::to_string(x);
    });
  }
  return check.finish();
}

using Suite = SuiteReport (*)(double);

struct NamedSuite {
  const char* name;
  Suite run;
};

constexpr NamedSuite kSuites[] = {
    {"ustat", suite_ustat}, {"theta", suite_theta}, {"psi", suite_psi},
    {"eigen", suite_eigen}, {"dist", suite_dist},
};

}  // namespace

std::vector<std::string> validation_suites() {
  std::vector<std::string> out;
  for (const NamedSuite& s : kSuites) out.emplace_back(s.name);
  return out;
}

std::vector<SuiteReport> run_validation(const std::vector<std::string>& suites,
                                        const std::string& inject_fault) {
  const std::vector<std::string> known = validation_suites();
  for (const std::string& s : suites) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw Error(ErrorKind::config, "unknown validation suite '" + s + "'");
    }
  }
  if (!inject_fault.empty() &&
      std::find(known.begin(), known.end(), inject_fault) == known.end()) {
    throw Error(ErrorKind::config, "unknown validation suite '" + inject_fault + "'");
  }

  std::vector<SuiteReport> out;
  for (const NamedSuite& s : kSuites) {
    if (!suites.empty() && std::find(suites.begin(), suites.end(), s.name) == suites.end()) {
      continue;
    }
    const double fault = inject_fault == s.name ? 1e-3 : 0.0;
    try {
      out.push_back(s.run(fault));
    } catch (const Error& e) {
      SuiteReport failed;
      failed.name = s.name;
      failed.passed = false;
      failed.failure = e.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

}  // namespace covtest
