#include "gpetas/polya_gamma.hpp"

#include <cmath>
#include <limits>

#include "gpetas/errors.hpp"

namespace gpetas {

double pg_mean(double b, double c) {
  if (std::abs(c) < 1e-8) return b / 4.0;
  return b / (2.0 * c) * std::tanh(c / 2.0);
}

namespace {

// Crossover point of the two series representations of the Jacobi density.
constexpr double kTrunc = 0.64;
constexpr long kMaxIter = 1000000;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

// CDF at t of the inverse Gaussian IG(mu, lambda = 1); mu = +inf gives the
// one-sided stable (Levy) limit 2*Phi(-1/sqrt(t)).
double pigauss(double t, double mu) {
  const double rt = std::sqrt(t);
  if (!std::isfinite(mu)) return 2.0 * norm_cdf(-1.0 / rt);
  return norm_cdf((t / mu - 1.0) / rt) +
         std::exp(2.0 / mu) * norm_cdf(-(t / mu + 1.0) / rt);
}

// Piecewise coefficients a_n(x) of the alternating series for the Jacobi
// density (left: small-x form; right: large-x form).
double series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x > kTrunc)
    return M_PI * h * std::exp(-h * h * M_PI * M_PI * x / 2.0);
  return std::pow(2.0 / (M_PI * x), 1.5) * M_PI * h *
         std::exp(-2.0 * h * h / x);
}

// IG(1/z, 1) truncated to (0, kTrunc]; z = 0 means the Levy limit.
double rtigauss(double z, RngStream& rng, long& iter) {
  const double t = kTrunc;
  if (z < 1.0 / t) {
    // Large-mean regime: sample the Levy body by the two-exponential method,
    // then tilt by exp(-z^2 X / 2).
    for (;;) {
      if (++iter > kMaxIter)
        throw NumericalError("sample_pg: rejection loop exceeded limit");
      double e1 = rng.exponential(1.0);
      double e2 = rng.exponential(1.0);
      while (e1 * e1 > 2.0 * e2 / t) {
        if (++iter > kMaxIter)
          throw NumericalError("sample_pg: rejection loop exceeded limit");
        e1 = rng.exponential(1.0);
        e2 = rng.exponential(1.0);
      }
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  // Small-mean regime: direct IG draws until one lands in (0, t].
  const double mu = 1.0 / z;
  for (;;) {
    if (++iter > kMaxIter)
      throw NumericalError("sample_pg: rejection loop exceeded limit");
    const double x = rng.inverse_gaussian(mu, 1.0);
    if (x <= t) return x;
  }
}

}  // namespace

double sample_pg(double c, RngStream& rng) {
  const double z = std::abs(c) / 2.0;
  const double fz = M_PI * M_PI / 8.0 + z * z / 2.0;
  const double t = kTrunc;
  // Mixture weights of the dominating density: exponential tail on (t, inf)
  // vs truncated inverse-Gaussian body on (0, t].
  const double p = (M_PI / (2.0 * fz)) * std::exp(-fz * t);
  const double mu = (z > 0.0) ? 1.0 / z
                              : std::numeric_limits<double>::infinity();
  const double q = 2.0 * std::exp(-z) * pigauss(t, mu);

  long iter = 0;
  for (;;) {
    if (++iter > kMaxIter)
      throw NumericalError("sample_pg: rejection loop exceeded limit");
    double x;
    if (rng.uniform() < p / (p + q)) {
      x = t + rng.exponential(1.0) / fz;
    } else {
      x = rtigauss(z, rng, iter);
    }
    // Alternating-series accept/reject on partial sums.
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    for (;;) {
      if (++iter > kMaxIter)
        throw NumericalError("sample_pg: rejection loop exceeded limit");
      ++n;
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return x / 4.0;
      } else {
        s += series_coef(n, x);
        if (y > s) break;  // reject this x, draw again
      }
    }
  }
}

}  // namespace gpetas
