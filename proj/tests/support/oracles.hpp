#pragma once

// Self-contained numerical oracles used by the test suites: adaptive
// quadrature, classical special functions, two-sample tests, batch-means
// standard errors, a dense Gaussian-posterior reference, and an independent
// Polya-gamma series sampler.  Everything here is deliberately simple and
// direct so it can serve as an independent check of the library's fast paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gpetas/rng.hpp"

namespace gpetas::test {

// ---- Adaptive Simpson quadrature ----

namespace detail {
inline double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double integrate_1d(const std::function<double(double)>& f, double a,
                           double b, double tol = 1e-12, int max_depth = 48) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson(fa, fm, fb, a, b);
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral of a radial density over the plane: int_0^{r_max} f(r) 2 pi r dr.
inline double integrate_radial(const std::function<double(double)>& f,
                               double r_max, double tol = 1e-12) {
  return integrate_1d([&](double r) { return f(r) * 2.0 * M_PI * r; }, 0.0,
                      r_max, tol);
}

// Same integral on dyadic pieces [0,s], [s,2s], [2s,4s], ... so a kernel
// concentrated at scale s is never missed by a first coarse Simpson pass
// over a domain many orders of magnitude wider.
inline double integrate_radial_dyadic(const std::function<double(double)>& f,
                                      double scale, double r_max,
                                      double tol = 1e-13) {
  auto g = [&](double r) { return f(r) * 2.0 * M_PI * r; };
  double total = integrate_1d(g, 0.0, scale, tol);
  double lo = scale;
  while (lo < r_max) {
    const double hi = std::min(2.0 * lo, r_max);
    total += integrate_1d(g, lo, hi, tol);
    lo = hi;
  }
  return total;
}

// ---- Moments and Monte Carlo helpers ----

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Standard error of the mean of a correlated sequence, via batch means.
inline double batch_means_se(const std::vector<double>& xs,
                             int n_batches = 20) {
  const std::size_t m = xs.size() / static_cast<std::size_t>(n_batches);
  if (m == 0) throw std::invalid_argument("batch_means_se: too few samples");
  std::vector<double> bm;
  bm.reserve(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      s += xs[static_cast<std::size_t>(b) * m + i];
    bm.push_back(s / static_cast<double>(m));
  }
  return std::sqrt(variance(bm) / static_cast<double>(n_batches));
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// ---- Regularized incomplete gamma and chi-squared tail ----

namespace detail {
inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}
}  // namespace detail

// Upper regularized incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// P(Chi2_df > x).
inline double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

// ---- Two-sample Kolmogorov-Smirnov ----

inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic two-sample KS p-value with Stephens' effective-size correction.
inline double ks_p_value(const std::vector<double>& a,
                         const std::vector<double>& b) {
  const double d = ks_statistic(a, b);
  const double ne = static_cast<double>(a.size()) *
                    static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  const double lambda =
      (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

// ---- Dense Gaussian-posterior reference ----
// N((K^{-1} + Omega)^{-1} u, (K^{-1} + Omega)^{-1}) by direct dense algebra;
// the slow-but-obvious counterpart of the library's Cholesky path.
struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline DensePosterior dense_gaussian_posterior(const Eigen::MatrixXd& K,
                                               const Eigen::VectorXd& omega,
                                               const Eigen::VectorXd& u) {
  Eigen::MatrixXd prec = K.inverse();
  prec += Eigen::MatrixXd(omega.asDiagonal());
  DensePosterior out;
  out.cov = prec.inverse();
  out.mean = out.cov * u;
  return out;
}

// ---- Independent Polya-gamma reference sampler ----
// PG(1, c) as the weighted sum of independent exponentials,
//   omega = sum_k g_k / (2 pi^2 (k - 1/2)^2 + c^2 / 2),  g_k ~ Exp(1),
// truncated at n_terms with the (deterministic) mean of the dropped tail
// added back.  Slow and memory-light; used only to validate the exact
// sampler distributionally.
inline double pg_series_draw(double c, RngStream& rng, int n_terms = 200) {
  double omega = 0.0;
  for (int k = 1; k <= n_terms; ++k) {
    const double kk = static_cast<double>(k) - 0.5;
    const double denom = 2.0 * M_PI * M_PI * kk * kk + 0.5 * c * c;
    omega += rng.exponential(1.0) / denom;
  }
  for (int k = n_terms + 1; k <= 200000; ++k) {
    const double kk = static_cast<double>(k) - 0.5;
    omega += 1.0 / (2.0 * M_PI * M_PI * kk * kk + 0.5 * c * c);
  }
  return omega;
}

}  // namespace gpetas::test
