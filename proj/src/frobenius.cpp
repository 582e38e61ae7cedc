#include "covtest/frobenius.hpp"

#include "covtest/dist.hpp"
#include "covtest/error.hpp"

#include <cmath>
#include <string>

namespace covtest {

namespace {

void require_rows(const SampleMatrix& x, std::size_t minimum, const char* what) {
  if (x.n() < minimum) {
    throw Error(ErrorKind::insufficient_sample,
                std::string(what) + ": needs at least " + std::to_string(minimum) +
                    " observations, got " + std::to_string(x.n()));
  }
}

void require_same_shape(const SampleMatrix& x1, const SampleMatrix& x2, const char* what) {
  if (x1.n() != x2.n() || x1.p() != x2.p()) {
    throw Error(ErrorKind::dimension,
                std::string(what) + ": samples must share shape, got " +
                    std::to_string(x1.n()) + "x" + std::to_string(x1.p()) + " and " +
                    std::to_string(x2.n()) + "x" + std::to_string(x2.p()));
  }
}

}  // namespace

double b_stat_naive(const SampleMatrix& x) {
  require_rows(x, 4, "b_stat");
  const Matrix g = x.gram();
  const auto n = static_cast<Eigen::Index>(x.n());
  const double nn = static_cast<double>(n);

  double pairs = 0.0;
  double triples = 0.0;
  double quads = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      pairs += g(j, k) * g(j, k);
      for (Eigen::Index l = 0; l < n; ++l) {
        if (l == j || l == k) continue;
        triples += g(j, k) * g(k, l);
        for (Eigen::Index m = 0; m < n; ++m) {
          if (m == j || m == k || m == l) continue;
          quads += g(j, k) * g(l, m);
        }
      }
    }
  }
  const double p2 = nn * (nn - 1.0);
  const double p3 = p2 * (nn - 2.0);
  const double p4 = p3 * (nn - 3.0);
  return pairs / p2 - 2.0 * triples / p3 + quads / p4;
}

double b_stat_fast(const SampleMatrix& x) {
  require_rows(x, 4, "b_stat");
  // Work with the off-diagonal part H of the Gram matrix. With h = H·1,
  // s = 1ᵀH1 and F = ‖H‖²_F, inclusion-exclusion over coincident indices
  // gives
  //   Σ* H_jk H_kl      = ‖h‖² - F
  //   Σ* H_jk H_lm      = s² - 4‖h‖² + 2F
  Matrix h_mat = x.gram();
  h_mat.diagonal().setZero();
  const double f = h_mat.squaredNorm();
  const Vector h = h_mat.rowwise().sum();
  const double s = h.sum();
  const double hh = h.squaredNorm();

  const double nn = static_cast<double>(x.n());
  const double p2 = nn * (nn - 1.0);
  const double p3 = p2 * (nn - 2.0);
  const double p4 = p3 * (nn - 3.0);
  return f / p2 - 2.0 * (hh - f) / p3 + (s * s - 4.0 * hh + 2.0 * f) / p4;
}

double c_stat_naive(const SampleMatrix& x1, const SampleMatrix& x2) {
  require_same_shape(x1, x2, "c_stat");
  require_rows(x1, 3, "c_stat");
  const Matrix k12 = x1.values() * x2.values().transpose();  // k12(j,k) = x¹_jᵀx²_k
  const auto n = static_cast<Eigen::Index>(x1.n());
  const double nn = static_cast<double>(n);

  double full = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) full += k12(j, k) * k12(j, k);

  double mixed = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == j) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        // x¹_jᵀx²_k x²_kᵀx¹_l  and  x²_jᵀx¹_k x¹_kᵀx²_l
        mixed += k12(j, k) * k12(l, k) + k12(k, j) * k12(k, l);
      }
    }
  }

  double cross = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == j) continue;
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index m = 0; m < n; ++m) {
          if (m == k) continue;
          cross += k12(j, k) * k12(l, m);
        }
    }

  return full / (nn * nn) - mixed / (nn * nn * (nn - 1.0)) +
         cross / (nn * nn * (nn - 1.0) * (nn - 1.0));
}

double c_stat_fast(const SampleMatrix& x1, const SampleMatrix& x2) {
  require_same_shape(x1, x2, "c_stat");
  require_rows(x1, 3, "c_stat");
  const Matrix k12 = x1.values() * x2.values().transpose();
  const double f = k12.squaredNorm();
  const Vector rows = k12.rowwise().sum();
  const Eigen::RowVectorXd cols = k12.colwise().sum();
  const double s = rows.sum();
  const double rr = rows.squaredNorm();
  const double cc = cols.squaredNorm();

  const double nn = static_cast<double>(x1.n());
  const double mixed = (cc - f) + (rr - f);
  const double cross = s * s - rr - cc + f;
  return f / (nn * nn) - mixed / (nn * nn * (nn - 1.0)) +
         cross / (nn * nn * (nn - 1.0) * (nn - 1.0));
}

double sigma1_hat(double b1, double b2, std::size_t n) {
  if (n < 1) throw Error(ErrorKind::insufficient_sample, "sigma1_hat: n must be >= 1");
  const double total = b1 + b2;
  if (!(total > 0.0)) {
    throw Error(ErrorKind::degenerate_variance,
                "sigma1_hat: b1 + b2 = " + std::to_string(total) + " is not positive");
  }
  return 2.0 / static_cast<double>(n) * total;
}

FrobeniusStat frobenius_test(const SampleMatrix& x1, const SampleMatrix& x2) {
  require_same_shape(x1, x2, "frobenius_test");
  require_rows(x1, 4, "frobenius_test");
  FrobeniusStat out;
  out.b1 = b_stat_fast(x1);
  out.b2 = b_stat_fast(x2);
  out.c = c_stat_fast(x1, x2);
  out.sigma1_hat = sigma1_hat(out.b1, out.b2, x1.n());
  out.t1 = (out.b1 + out.b2 - 2.0 * out.c) / out.sigma1_hat;
  out.p1 = std_normal_sf(out.t1);
  return out;
}

}  // namespace covtest
