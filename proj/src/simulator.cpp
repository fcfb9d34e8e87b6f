#include "gpetas/simulator.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gpetas/errors.hpp"

namespace gpetas {

namespace {
double sigmoid_local(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

void SimConfig::validate() const {
  window.validate();
  if (!(lambda_bar > 0.0)) throw ConfigError("simulate: lambda_bar must be > 0");
  theta.validate();
  if (!(beta > 0.0)) throw ConfigError("simulate: beta must be > 0");
  if (source == Source::gp) nu.validate();
  if (source == Source::explicit_field && !field.evaluate)
    throw ConfigError("simulate: explicit background field not set");
}

Catalog simulate_background(const SimConfig& cfg, RngStream& rng) {
  cfg.validate();
  const DomainWindow& w = cfg.window;
  const double volume = w.area() * w.duration();
  const long n_cand = rng.poisson(cfg.lambda_bar * volume);

  Eigen::Matrix<double, Eigen::Dynamic, 2> cand(n_cand, 2);
  for (long i = 0; i < n_cand; ++i) {
    cand(i, 0) = rng.uniform(w.x_range[0], w.x_range[1]);
    cand(i, 1) = rng.uniform(w.y_range[0], w.y_range[1]);
  }

  Eigen::VectorXd f;
  if (cfg.source == SimConfig::Source::gp && n_cand > 0)
    f = sample_prior(cand, cfg.nu, rng).values;

  Catalog out;
  out.window = w;
  for (long i = 0; i < n_cand; ++i) {
    const double r = rng.uniform(0.0, cfg.lambda_bar);
    const double intensity =
        (cfg.source == SimConfig::Source::gp)
            ? cfg.lambda_bar * sigmoid_local(f(i))
            : cfg.field(cand(i, 0), cand(i, 1));
    if (r < intensity) {
      Event e;
      e.x = cand(i, 0);
      e.y = cand(i, 1);
      e.t = rng.uniform(w.t_range[0], w.t_range[1]);
      e.m = w.m0 + rng.exponential(cfg.beta);
      out.events.push_back(e);
    }
  }
  out.sort_by_time();
  return out;
}

BranchedCatalog simulate_offspring(const Catalog& background,
                                   const SimConfig& cfg, RngStream& rng) {
  const DomainWindow& w = cfg.window;
  const TriggeringParams& th = cfg.theta;
  const double t_max = w.t_range[1];
  const double m0 = w.m0;

  std::vector<Event> events = background.events;
  std::vector<int> parent(events.size(), 0);  // 0 = background (build order)

  // Breadth across generations: every appended event is itself processed.
  for (std::size_t j = 0; j < events.size(); ++j) {
    const Event ej = events[j];  // copy: push_back below may reallocate
    const double horizon = t_max - ej.t;
    if (horizon <= 0.0 || th.K0 <= 0.0) continue;
    // Dominating homogeneous rate: kappa(m_j) g(0) = kappa(m_j) c^{-p}.
    const double lam_max =
        productivity(ej.m, th, m0) * std::pow(th.c, -th.p);
    const double mean_cand = lam_max * horizon;
    if (mean_cand > static_cast<double>(kMaxOffspringCandidates))
      throw NumericalError(
          "simulate_offspring: candidate bound " + std::to_string(mean_cand) +
          " exceeds guard (runaway productivity; supercritical-like)");
    const long n_cand = rng.poisson(mean_cand);
    const double sm = sigma_m(ej.m, th, m0);
    for (long k = 0; k < n_cand; ++k) {
      const double dt = rng.uniform(0.0, horizon);
      // Omori thinning ratio g(dt)/g(0) = ((dt+c)/c)^{-p}.
      if (rng.uniform() >= std::pow(th.c / (dt + th.c), th.p)) continue;
      // Radial inverse CDF of the Pareto kernel: W = U^{-1/(q-1)} - 1,
      // rho = sqrt(sigma_m W); uniform angle.
      const double u = rng.uniform();
      const double rho =
          std::sqrt(sm * (std::pow(u, -1.0 / (th.q - 1.0)) - 1.0));
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      const double x = ej.x + rho * std::cos(ang);
      const double y = ej.y + rho * std::sin(ang);
      if (!w.contains_xy(x, y)) continue;  // mass outside X discarded
      Event off;
      off.t = ej.t + dt;
      off.x = x;
      off.y = y;
      off.m = m0 + rng.exponential(cfg.beta);
      events.push_back(off);
      parent.push_back(static_cast<int>(j) + 1);
      if (events.size() > kMaxSimEvents)
        throw NumericalError(
            "simulate_offspring: supercritical branching, event count "
            "exceeds 1e6");
    }
  }

  // Time-sort with the parent labels remapped to final positions.
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&events](std::size_t a, std::size_t b) {
                     return events[a].t < events[b].t;
                   });
  std::vector<std::size_t> new_pos(events.size());
  for (std::size_t r = 0; r < order.size(); ++r) new_pos[order[r]] = r;

  BranchedCatalog out;
  out.catalog.window = w;
  out.catalog.events.reserve(events.size());
  out.z.reserve(events.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t orig = order[r];
    out.catalog.events.push_back(events[orig]);
    const int pz = parent[orig];
    out.z.push_back(pz == 0 ? 0
                            : static_cast<int>(new_pos[pz - 1]) + 1);
  }
  return out;
}

BranchedCatalog simulate_catalog(const SimConfig& cfg) {
  RngStream rng(cfg.seed);
  Catalog bg = simulate_background(cfg, rng);
  return simulate_offspring(bg, cfg, rng);
}

}  // namespace gpetas
