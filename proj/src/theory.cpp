#include "covtest/theory.hpp"

#include "covtest/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

namespace covtest {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void inside_support(double alpha, const char* what) {
  std::ostringstream msg;
  msg << what << ": alpha = " << alpha << " lies within " << kSupportGap
      << " of the bulk support";
  throw Error(ErrorKind::domain, msg.str());
}

void check_atom(double alpha, double atom, const char* what) {
  if (!(std::abs(alpha - atom) >= kSupportGap)) inside_support(alpha, what);
}

void check_outside(const BulkSpectrum& bulk, double alpha, const char* what) {
  if (!std::isfinite(alpha)) {
    throw Error(ErrorKind::domain, std::string(what) + ": alpha must be finite");
  }
  std::visit(Overloaded{
                 [&](const PointMass& b) { check_atom(alpha, b.c, what); },
                 [&](const TwoPoint& b) {
                   check_atom(alpha, b.a, what);
                   check_atom(alpha, b.b, what);
                 },
                 [&](const UniformBulk& b) {
                   if (!(alpha <= b.lo - kSupportGap || alpha >= b.hi + kSupportGap)) {
                     inside_support(alpha, what);
                   }
                 },
                 [&](const EmpiricalBulk& b) {
                   for (double t : b.eigenvalues) check_atom(alpha, t, what);
                 },
             },
             bulk.shape);
}

// ∫ t/(α - t) dH(t)
double first_integral(const BulkSpectrum& bulk, double alpha) {
  return std::visit(
      Overloaded{
          [&](const PointMass& b) { return b.c / (alpha - b.c); },
          [&](const TwoPoint& b) {
            return 0.5 * (b.a / (alpha - b.a) + b.b / (alpha - b.b));
          },
          [&](const UniformBulk& b) {
            const double w = b.hi - b.lo;
            return -1.0 - alpha / w * std::log((alpha - b.hi) / (alpha - b.lo));
          },
          [&](const EmpiricalBulk& b) {
            if (b.eigenvalues.empty()) return 0.0;
            double sum = 0.0;
            for (double t : b.eigenvalues) sum += t / (alpha - t);
            return sum / static_cast<double>(b.eigenvalues.size());
          },
      },
      bulk.shape);
}

// ∫ t²/(α - t)² dH(t)
double second_integral(const BulkSpectrum& bulk, double alpha) {
  const auto atom = [alpha](double t) {
    const double r = t / (alpha - t);
    return r * r;
  };
  return std::visit(
      Overloaded{
          [&](const PointMass& b) { return atom(b.c); },
          [&](const TwoPoint& b) { return 0.5 * (atom(b.a) + atom(b.b)); },
          [&](const UniformBulk& b) {
            const double w = b.hi - b.lo;
            return alpha * alpha / ((alpha - b.hi) * (alpha - b.lo)) +
                   2.0 * alpha / w * std::log((alpha - b.hi) / (alpha - b.lo)) + 1.0;
          },
          [&](const EmpiricalBulk& b) {
            if (b.eigenvalues.empty()) return 0.0;
            double sum = 0.0;
            for (double t : b.eigenvalues) sum += atom(t);
            return sum / static_cast<double>(b.eigenvalues.size());
          },
      },
      bulk.shape);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::domain, std::string(what) + " must be positive and finite");
  }
}

void require_supercritical(const BulkSpectrum& bulk, double alpha, const char* what) {
  if (!is_supercritical(bulk, alpha)) {
    std::ostringstream msg;
    msg << what << ": alpha = " << alpha << " is not supercritical (psi' = "
        << psi_prime(bulk, alpha) << ")";
    throw Error(ErrorKind::domain, msg.str());
  }
}

}  // namespace

BulkSpectrum BulkSpectrum::point_mass(double c, double y) {
  require_positive(c, "point_mass: c");
  require_positive(y, "bulk: y");
  return BulkSpectrum{PointMass{c}, y};
}

BulkSpectrum BulkSpectrum::two_point(double a, double b, double y) {
  require_positive(a, "two_point: a");
  require_positive(b, "two_point: b");
  require_positive(y, "bulk: y");
  return BulkSpectrum{TwoPoint{a, b}, y};
}

BulkSpectrum BulkSpectrum::uniform(double lo, double hi, double y) {
  require_positive(lo, "uniform: lo");
  require_positive(y, "bulk: y");
  if (!(hi > lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::domain, "uniform: need lo < hi");
  }
  return BulkSpectrum{UniformBulk{lo, hi}, y};
}

BulkSpectrum BulkSpectrum::empirical(std::vector<double> eigenvalues, double y) {
  require_positive(y, "bulk: y");
  for (double t : eigenvalues) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw Error(ErrorKind::domain, "empirical bulk: eigenvalues must be finite and >= 0");
    }
  }
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  return BulkSpectrum{EmpiricalBulk{std::move(eigenvalues)}, y};
}

double psi(const BulkSpectrum& bulk, double alpha) {
  check_outside(bulk, alpha, "psi");
  return alpha + bulk.y * alpha * first_integral(bulk, alpha);
}

double psi_prime(const BulkSpectrum& bulk, double alpha) {
  check_outside(bulk, alpha, "psi_prime");
  return 1.0 - bulk.y * second_integral(bulk, alpha);
}

bool is_supercritical(const BulkSpectrum& bulk, double alpha) {
  return psi_prime(bulk, alpha) > 0.0;
}

double population_sigma1_sq(const Matrix& sigma1, const Matrix& sigma2, double gamma4_1,
                            double gamma4_2, std::size_t n) {
  if (sigma1.rows() != sigma1.cols() || sigma2.rows() != sigma2.cols() ||
      sigma1.rows() != sigma2.rows()) {
    throw Error(ErrorKind::dimension, "population_sigma1_sq: need two p x p matrices of equal size");
  }
  if (n == 0) throw Error(ErrorKind::domain, "population_sigma1_sq: n must be positive");
  const double nn = static_cast<double>(n);
  const Matrix diff = sigma1 - sigma2;
  const Matrix cross = sigma1 * sigma2;

  double total = 0.0;
  const Matrix* sigmas[2] = {&sigma1, &sigma2};
  const double gammas[2] = {gamma4_1, gamma4_2};
  for (int i = 0; i < 2; ++i) {
    const Matrix& s = *sigmas[i];
    const Matrix sq = s * s;
    const Matrix gap = sq - cross;
    const Matrix root = sym_sqrt(s);
    const Matrix a = root * diff * root;
    total += 4.0 / (nn * nn) * sq.trace() + 8.0 / nn * (gap * gap).trace() +
             4.0 * (gammas[i] - 3.0) / nn * a.diagonal().squaredNorm();
  }
  const double tr_cross = cross.trace();
  return total + 8.0 / (nn * nn) * tr_cross * tr_cross;
}

double population_spike_var(const BulkSpectrum& bulk, double alpha_k, double gamma4,
                            double u4_sum) {
  if (!(u4_sum >= 0.0 && u4_sum <= 1.0)) {
    throw Error(ErrorKind::domain, "population_spike_var: u4_sum must lie in [0, 1]");
  }
  require_supercritical(bulk, alpha_k, "population_spike_var");
  const double d = psi_prime(bulk, alpha_k);
  const double a2 = alpha_k * alpha_k;
  return (gamma4 - 3.0) * a2 * d * d * u4_sum + 2.0 * a2 * d;
}

double population_spike_cov(const BulkSpectrum& bulk, double alpha_k, double alpha_l,
                            double gamma4, double u22_sum) {
  require_supercritical(bulk, alpha_k, "population_spike_cov");
  require_supercritical(bulk, alpha_l, "population_spike_cov");
  return (gamma4 - 3.0) * alpha_k * alpha_l * psi_prime(bulk, alpha_k) *
         psi_prime(bulk, alpha_l) * u22_sum;
}

double theta_finite(const BulkSpectrum& bulk, double alpha) {
  if (!std::holds_alternative<EmpiricalBulk>(bulk.shape)) {
    throw Error(ErrorKind::domain, "theta_finite: requires an empirical bulk");
  }
  return psi(bulk, alpha);
}

}  // namespace covtest
