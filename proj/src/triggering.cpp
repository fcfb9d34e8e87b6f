#include "gpetas/triggering.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "gpetas/errors.hpp"

namespace gpetas {

void TriggeringParams::validate() const {
  if (!(K0 >= 0.0) || !std::isfinite(K0))
    throw ConfigError("theta: K0 must be >= 0 and finite");
  if (!(c > 0.0)) throw ConfigError("theta: c must be > 0");
  if (!(p > 0.0)) throw ConfigError("theta: p must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("theta: alpha must be > 0");
  if (!(d > 0.0)) throw ConfigError("theta: d must be > 0");
  if (!(gamma >= 0.0)) throw ConfigError("theta: gamma must be >= 0");
  if (!(q > 1.0)) throw ConfigError("theta: q must be > 1");
}

BackgroundField make_constant_field(double value) {
  return BackgroundField{[value](double, double) { return value; },
                         "constant"};
}

BackgroundField make_piecewise_field(std::vector<PiecewiseCell> cells) {
  auto eval = [cells = std::move(cells)](double x, double y) {
    for (const PiecewiseCell& c : cells) {
      if (x >= c.x0 && x <= c.x1 && y >= c.y0 && y <= c.y1) return c.value;
    }
    return 0.0;
  };
  return BackgroundField{std::move(eval), "piecewise"};
}

double piecewise_integral(const std::vector<PiecewiseCell>& cells) {
  double s = 0.0;
  for (const PiecewiseCell& c : cells) s += c.value * (c.x1 - c.x0) * (c.y1 - c.y0);
  return s;
}

double productivity(double m, const TriggeringParams& params, double m0) {
  if (m < m0) throw Error("productivity: m below m0");
  return params.K0 * std::exp(params.alpha * (m - m0));
}

double omori(double dt, const TriggeringParams& params) {
  if (dt < 0.0) throw Error("omori: negative elapsed time");
  return std::pow(dt + params.c, -params.p);
}

double sigma_m(double m, const TriggeringParams& params, double m0) {
  return params.d * params.d *
         std::pow(10.0, 2.0 * params.gamma * (m - m0));
}

double spatial_kernel(double dx, double dy, double m,
                      const TriggeringParams& params, double m0) {
  if (m < m0) throw Error("spatial_kernel: m below m0");
  if (!(params.q > 1.0))
    throw ConfigError("spatial_kernel: q must be > 1 for normalizability");
  const double s = sigma_m(m, params, m0);
  const double r2 = dx * dx + dy * dy;
  return (params.q - 1.0) / (M_PI * s) * std::pow(1.0 + r2 / s, -params.q);
}

double triggering_phi(double dt, double dx, double dy, double m_parent,
                      const TriggeringParams& params, double m0) {
  return productivity(m_parent, params, m0) * omori(dt, params) *
         spatial_kernel(dx, dy, m_parent, params, m0);
}

double conditional_intensity(double t, double x, double y, const Catalog& cat,
                             const BackgroundField& mu,
                             const TriggeringParams& params) {
  double lam = mu(x, y);
  const double m0 = cat.window.m0;
  for (const Event& e : cat.events) {
    if (e.t >= t) break;  // events are time-sorted
    lam += triggering_phi(t - e.t, x - e.x, y - e.y, e.m, params, m0);
  }
  return lam;
}

std::vector<double> branching_probabilities(std::size_t i, const Catalog& cat,
                                            const BackgroundField& mu,
                                            const TriggeringParams& params) {
  const Event& ei = cat.events.at(i);
  const double m0 = cat.window.m0;
  std::vector<double> probs(i + 1);
  probs[0] = mu(ei.x, ei.y);
  double total = probs[0];
  for (std::size_t j = 0; j < i; ++j) {
    const Event& ej = cat.events[j];
    probs[j + 1] =
        triggering_phi(ei.t - ej.t, ei.x - ej.x, ei.y - ej.y, ej.m, params, m0);
    total += probs[j + 1];
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("branching_probabilities: degenerate intensity at event " +
                         std::to_string(i));
  for (double& v : probs) v /= total;
  return probs;
}

double omori_integral(double dt, double c, double p) {
  if (dt < 0.0) throw Error("omori_integral: negative interval");
  if (std::abs(p - 1.0) < 1e-10) return std::log(dt + c) - std::log(c);
  return (std::pow(c, 1.0 - p) - std::pow(dt + c, 1.0 - p)) / (p - 1.0);
}

double integrated_triggering(double t_i, double m_i, double t_end,
                             const TriggeringParams& params, double m0) {
  if (t_end < t_i) throw Error("integrated_triggering: t_end before t_i");
  return productivity(m_i, params, m0) *
         omori_integral(t_end - t_i, params.c, params.p);
}

double log_likelihood(const Catalog& cat, const BackgroundField& mu,
                      const TriggeringParams& params, double mu_integral) {
  const double m0 = cat.window.m0;
  const double t_max = cat.window.t_range[1];
  double ll = -cat.window.duration() * mu_integral;
  const std::size_t n = cat.events.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Event& ei = cat.events[i];
    double lam = mu(ei.x, ei.y);
    for (std::size_t j = 0; j < i; ++j) {
      const Event& ej = cat.events[j];
      lam += triggering_phi(ei.t - ej.t, ei.x - ej.x, ei.y - ej.y, ej.m,
                            params, m0);
    }
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw NumericalError("log_likelihood: non-positive intensity at event " +
                           std::to_string(i));
    ll += std::log(lam);
    ll -= integrated_triggering(ei.t, ei.m, t_max, params, m0);
  }
  if (!std::isfinite(ll))
    throw NumericalError("log_likelihood: non-finite result");
  return ll;
}

}  // namespace gpetas
