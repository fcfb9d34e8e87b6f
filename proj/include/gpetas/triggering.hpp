#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gpetas/catalog.hpp"

namespace gpetas {

// ETAS triggering parameters theta_phi = (K0, c, p, alpha, d, gamma, q).
struct TriggeringParams {
  double K0 = 0.0;     // productivity coefficient, >= 0 (0 disables triggering)
  double c = 1.0;      // Omori offset, days, > 0
  double p = 1.2;      // Omori exponent, > 0
  double alpha = 1.0;  // productivity exponent, > 0
  double d = 1.0;      // spatial scale, > 0
  double gamma = 0.0;  // magnitude scaling of the spatial kernel, >= 0
  double q = 2.0;      // spatial decay exponent, > 1 strictly

  // Throws ConfigError on violated constraints.
  void validate() const;
};

// Evaluable background intensity mu(x) >= 0, in events/day/area-unit.
struct BackgroundField {
  std::function<double(double, double)> evaluate;
  std::string tag;  // piecewise | kde | gp-sample | constant | grid

  double operator()(double x, double y) const { return evaluate(x, y); }
};

// Axis-aligned cell of a piecewise-constant background.
struct PiecewiseCell {
  double x0, x1, y0, y1;
  double value;
};

BackgroundField make_constant_field(double value);
// First matching cell wins; zero outside all cells.
BackgroundField make_piecewise_field(std::vector<PiecewiseCell> cells);
// Integral of the piecewise field over the plane (cells assumed disjoint).
double piecewise_integral(const std::vector<PiecewiseCell>& cells);

// kappa(m) = K0 exp(alpha (m - m0)).  Throws Error if m < m0.
double productivity(double m, const TriggeringParams& params, double m0);

// g(dt) = (dt + c)^{-p}.  Throws Error if dt < 0.
double omori(double dt, const TriggeringParams& params);

// sigma_m = d^2 10^{2 gamma (m - m0)}, the squared spatial scale of the kernel.
double sigma_m(double m, const TriggeringParams& params, double m0);

// Normalized spatial Pareto kernel
//   s(dx|m) = (q-1)/(pi sigma_m) [1 + |dx|^2/sigma_m]^{-q},
// integrating to 1 over the plane.  Throws Error if m < m0; ConfigError if
// q <= 1 (non-normalizable).
double spatial_kernel(double dx, double dy, double m,
                      const TriggeringParams& params, double m0);

// Full triggering density phi(dt, dx | m_parent) = kappa * g * s.
double triggering_phi(double dt, double dx, double dy, double m_parent,
                      const TriggeringParams& params, double m0);

// lambda(t, x | history) = mu(x) + sum over events with t_i < t of
// phi(t - t_i, x - x_i | m_i).
double conditional_intensity(double t, double x, double y, const Catalog& cat,
                             const BackgroundField& mu,
                             const TriggeringParams& params);

// Parent probabilities for event i (0-based).  Returns a vector of length
// i + 1: entry 0 is the background probability p_i0, entry j (1 <= j <= i)
// is the probability that the parent is catalog event j-1.  Entries sum to 1.
// Throws NumericalError on zero total intensity.
std::vector<double> branching_probabilities(std::size_t i, const Catalog& cat,
                                            const BackgroundField& mu,
                                            const TriggeringParams& params);

// Integral of the Omori density over [0, dt]:
//   [c^{1-p} - (dt+c)^{1-p}]/(p-1),  or the log form at p = 1
// (switch at |p-1| < 1e-10).
double omori_integral(double dt, double c, double p);

// Expected offspring of an event with mark m_i over (t_i, t_end], spatial
// integral taken as 1 (whole-plane kernel normalization):
//   kappa(m_i) * omori_integral(t_end - t_i).
// Throws Error if t_end < t_i.
double integrated_triggering(double t_i, double m_i, double t_end,
                             const TriggeringParams& params, double m0);

// Point-process log likelihood
//   sum_i ln lambda(t_i, x_i) - |T| mu_integral
//     - sum_i integrated_triggering(t_i, m_i, t_max)
// with mu_integral = int_X mu dx supplied by the caller.  History for event i
// is events j < i.  Throws NumericalError if any event intensity is <= 0 or
// the result is non-finite.
double log_likelihood(const Catalog& cat, const BackgroundField& mu,
                      const TriggeringParams& params, double mu_integral);

}  // namespace gpetas
