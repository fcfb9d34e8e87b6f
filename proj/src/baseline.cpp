#include "gpetas/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpetas/errors.hpp"

namespace gpetas {

void KdeConfig::validate() const {
  if (n_p < 1) throw ConfigError("kde: n_p must be >= 1");
  if (!(d_min > 0.0)) throw ConfigError("kde: d_min must be > 0");
}

std::vector<double> adaptive_bandwidths(const Catalog& cat,
                                        const KdeConfig& cfg) {
  cfg.validate();
  const std::size_t n = cat.events.size();
  if (n < static_cast<std::size_t>(cfg.n_p) + 1)
    throw ConfigError("kde: catalog must have at least n_p + 1 events");

  double d_floor = cfg.d_min;
  if (cfg.variant == KdeConfig::Variant::silverman) {
    // Silverman's rule per coordinate, averaged into one isotropic floor.
    double floor_sum = 0.0;
    for (int coor = 0; coor < 2; ++coor) {
      double mean = 0.0;
      for (const Event& e : cat.events) mean += (coor == 0 ? e.x : e.y);
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (const Event& e : cat.events) {
        const double v = (coor == 0 ? e.x : e.y) - mean;
        ss += v * v;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      floor_sum += 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
    }
    d_floor = floor_sum / 2.0;
  }

  std::vector<double> d(n);
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = cat.events[i].x - cat.events[j].x;
      const double dy = cat.events[i].y - cat.events[j].y;
      dist2[j] = dx * dx + dy * dy;
    }
    dist2[i] = std::numeric_limits<double>::infinity();  // exclude self
    std::nth_element(dist2.begin(), dist2.begin() + (cfg.n_p - 1), dist2.end());
    d[i] = std::max(d_floor, std::sqrt(dist2[cfg.n_p - 1]));
  }
  return d;
}

BackgroundField kde_background(const Catalog& cat,
                               const std::vector<double>& p_background,
                               const std::vector<double>& bandwidths,
                               double t_window_length) {
  const std::size_t n = cat.events.size();
  if (p_background.size() != n || bandwidths.size() != n)
    throw ConfigError("kde: vector sizes do not match the catalog");
  if (!(t_window_length > 0.0))
    throw ConfigError("kde: window length must be > 0");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = cat.events[i].x;
    ys[i] = cat.events[i].y;
  }
  auto eval = [xs, ys, p_background, bandwidths, t_window_length,
               n](double x, double y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x - xs[i];
      const double dy = y - ys[i];
      const double d2 = bandwidths[i] * bandwidths[i];
      s += p_background[i] / (2.0 * M_PI * d2) *
           std::exp(-(dx * dx + dy * dy) / (2.0 * d2));
    }
    return s / t_window_length;
  };
  return BackgroundField{std::move(eval), "kde"};
}

TriggeringParams em_default_init(
    const std::array<std::array<double, 2>, 7>& bounds) {
  double v[7];
  for (int k = 0; k < 7; ++k) {
    const double lo = std::max(bounds[k][0], 0.01);
    v[k] = std::sqrt(lo * bounds[k][1]);
  }
  TriggeringParams th;
  th.K0 = v[0]; th.c = v[1]; th.p = v[2]; th.alpha = v[3];
  th.d = v[4]; th.gamma = v[5]; th.q = v[6];
  return th;
}

namespace {

// Pairwise geometry shared by all M-step objective evaluations.
struct PairData {
  // Per ordered pair (j < i): flat arrays aligned with `weight`.
  std::vector<double> dt, r2, dm_parent;
  std::vector<std::size_t> parent;  // j index of each pair
  std::vector<double> weight;       // p_ij, refreshed each E-step
  // Per event: m - m0 and t_max - t for the integral term.
  std::vector<double> dm_event, horizon;
  // Compacted view of the pairs with non-negligible weight, plus the exact
  // total weight (the dropped mass is below 1e-12 per pair and only the
  // objective, not the E-step, uses the compaction).
  std::vector<double> a_dt, a_r2, a_dm, a_w;
  double weight_total = 0.0;

  explicit PairData(const Catalog& cat) {
    const double m0 = cat.window.m0;
    const double t_max = cat.window.t_range[1];
    const std::size_t n = cat.events.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Event& ei = cat.events[i];
      for (std::size_t j = 0; j < i; ++j) {
        const Event& ej = cat.events[j];
        dt.push_back(ei.t - ej.t);
        const double dx = ei.x - ej.x, dy = ei.y - ej.y;
        r2.push_back(dx * dx + dy * dy);
        dm_parent.push_back(ej.m - m0);
        parent.push_back(j);
      }
      dm_event.push_back(ei.m - m0);
      horizon.push_back(t_max - ei.t);
    }
    weight.assign(dt.size(), 0.0);
  }

  // Rebuild the active-pair arrays after an E-step.
  void compact() {
    a_dt.clear();
    a_r2.clear();
    a_dm.clear();
    a_w.clear();
    weight_total = 0.0;
    weight_dm = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) {
      weight_total += weight[k];
      weight_dm += weight[k] * dm_parent[k];
      if (weight[k] < 1e-12) continue;
      a_dt.push_back(dt[k]);
      a_r2.push_back(r2[k]);
      a_dm.push_back(dm_parent[k]);
      a_w.push_back(weight[k]);
    }
  }
  double weight_dm = 0.0;  // sum w * (m_parent - m0)

  // sum_i exp(alpha dm_i) G(horizon_i; c, p) from the integral term, so that
  // the K0 coordinate has the closed-form maximizer W / S.
  double kappa_integral_sum(double alpha, double c, double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dm_event.size(); ++i)
      s += std::exp(alpha * dm_event[i]) * omori_integral(horizon[i], c, p);
    return s;
  }

  // Pair sums entering the objective; each depends on one or two coordinates
  // only, which q_cache exploits during the coordinate search.
  double sum_w_ln_dtc(double c) const {
    double s = 0.0;
    for (std::size_t k = 0; k < a_w.size(); ++k)
      s += a_w[k] * std::log(a_dt[k] + c);
    return s;
  }
  double sum_w_log1p(double d, double gamma) const {
    const double ln10 = std::log(10.0);
    double s = 0.0;
    for (std::size_t k = 0; k < a_w.size(); ++k) {
      const double sigma =
          std::exp(2.0 * std::log(d) + 2.0 * gamma * a_dm[k] * ln10);
      s += a_w[k] * std::log1p(a_r2[k] / sigma);
    }
    return s;
  }
};

// Expected complete-data log likelihood as a function of theta, with the
// pair sums cached per coordinate value:
//   Q = W (ln K0 + ln(q-1) - ln pi) + alpha Swdm - p S_c
//       - (2 ln d) W - (2 gamma ln 10) Swdm - q S_dg - K0 S_int
// where S_c = sum w ln(dt+c) depends on c only, S_dg = sum w log1p(r^2/sigma)
// on (d, gamma), and S_int = sum exp(alpha dm) G(horizon) on (alpha, c, p).
class QCache {
 public:
  explicit QCache(const PairData& data) : data_(data) {}

  double value(const double v[7]) {
    const double ln10 = std::log(10.0);
    refresh(v);
    return data_.weight_total *
               (std::log(v[0]) + std::log(v[6] - 1.0) - std::log(M_PI) -
                2.0 * std::log(v[4])) +
           (v[3] - 2.0 * v[5] * ln10) * data_.weight_dm - v[2] * s_c_ -
           v[6] * s_dg_ - v[0] * s_int_;
  }

  double integral_sum(const double v[7]) {
    refresh(v);
    return s_int_;
  }

 private:
  void refresh(const double v[7]) {
    if (v[1] != c_) {
      s_c_ = data_.sum_w_ln_dtc(v[1]);
      c_ = v[1];
    }
    if (v[4] != d_ || v[5] != g_) {
      s_dg_ = data_.sum_w_log1p(v[4], v[5]);
      d_ = v[4];
      g_ = v[5];
    }
    if (v[3] != ia_ || v[1] != ic_ || v[2] != ip_) {
      s_int_ = data_.kappa_integral_sum(v[3], v[1], v[2]);
      ia_ = v[3];
      ic_ = v[1];
      ip_ = v[2];
    }
  }

  const PairData& data_;
  double c_ = -1.0, s_c_ = 0.0;
  double d_ = -1.0, g_ = -1.0, s_dg_ = 0.0;
  double ia_ = -1.0, ic_ = -1.0, ip_ = -1.0, s_int_ = 0.0;
};

// Coordinate-wise multiplicative line search on the cached Q objective, with
// one restart at the initial step size.  Keeps every iterate inside the
// bounds.  K0 enters Q as W log K0 - K0 S, so it is profiled out exactly
// (K0 = W/S, clamped to the box) and re-solved whenever alpha, c, or p move.
// Sweeps are capped per call: the EM outer loop only needs an improvement of
// Q, not its exact maximum (generalized EM).
TriggeringParams maximize_q(const PairData& data, TriggeringParams theta,
                            const std::array<std::array<double, 2>, 7>& bounds) {
  double v[7] = {theta.K0, theta.c,     theta.p, theta.alpha,
                 theta.d,  theta.gamma, theta.q};
  // q_objective coordinate order: v = (K0, c, p, alpha, d, gamma, q).
  QCache cache(data);
  auto solve_k0 = [&]() {
    const double s = cache.integral_sum(v);
    const double k0 = (s > 0.0) ? data.weight_total / s : bounds[0][1] / 2.0;
    const double lo = std::max(bounds[0][0], 1e-12);
    v[0] = std::clamp(k0, lo, bounds[0][1] * (1.0 - 1e-12));
  };
  solve_k0();
  double best = cache.value(v);

  for (int restart = 0; restart < 2; ++restart) {
    double step = 0.5;  // log-space step
    int sweeps = 0;     // safety valve only; normal runs stay well under it
    while (step > 1e-4 && sweeps++ < 400) {
      bool improved = false;
      for (int k = 1; k < 7; ++k) {
        for (double sgn : {+1.0, -1.0}) {
          const double old = v[k];
          const double old_k0 = v[0];
          const double cand = old * std::exp(sgn * step);
          if (!(cand > bounds[k][0] && cand < bounds[k][1])) continue;
          v[k] = cand;
          if (k <= 3) solve_k0();  // c, p, alpha change the K0 optimum
          const double q = cache.value(v);
          if (q > best + 1e-12) {
            best = q;
            improved = true;
          } else {
            v[k] = old;
            v[0] = old_k0;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }
  TriggeringParams th;
  th.K0 = v[0]; th.c = v[1]; th.p = v[2]; th.alpha = v[3];
  th.d = v[4]; th.gamma = v[5]; th.q = v[6];
  return th;
}

}  // namespace

MleFit em_fit(const Catalog& cat, const EmConfig& cfg,
              const TriggeringParams& init_theta) {
  cfg.kde.validate();
  if (cat.events.empty()) throw ConfigError("em_fit: empty catalog");
  init_theta.validate();

  const std::size_t n = cat.events.size();
  const EvalGrid grid(cfg.grid_nx, cfg.grid_ny, cat.window);

  MleFit fit;
  fit.theta = init_theta;
  fit.bandwidths = adaptive_bandwidths(cat, cfg.kde);
  fit.p_background.assign(n, 0.5);

  PairData data(cat);

  auto rebuild_field = [&](const std::vector<double>& p_bg) {
    return kde_background(cat, p_bg, fit.bandwidths, cat.window.duration());
  };
  fit.mu_kde = rebuild_field(fit.p_background);

  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> prev_p = fit.p_background;
  TriggeringParams prev_theta = fit.theta;
  BackgroundField prev_accepted_mu = fit.mu_kde;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    // E-step: soft branching under the current background and theta.
    std::size_t pair_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Event& ei = cat.events[i];
      const double mu_i = fit.mu_kde(ei.x, ei.y);
      double total = mu_i;
      const std::size_t row_begin = pair_idx;
      for (std::size_t j = 0; j < i; ++j, ++pair_idx) {
        const Event& ej = cat.events[j];
        data.weight[pair_idx] =
            triggering_phi(ei.t - ej.t, ei.x - ej.x, ei.y - ej.y, ej.m,
                           fit.theta, cat.window.m0);
        total += data.weight[pair_idx];
      }
      if (!(total > 0.0) || !std::isfinite(total))
        throw NumericalError("em_fit: degenerate intensity at event " +
                             std::to_string(i));
      fit.p_background[i] = mu_i / total;
      pair_idx = row_begin;
      for (std::size_t j = 0; j < i; ++j, ++pair_idx)
        data.weight[pair_idx] /= total;
    }

    // M-step: background from p_i0, then theta on the Q objective.
    fit.mu_kde = rebuild_field(fit.p_background);
    data.compact();
    fit.theta = maximize_q(data, fit.theta, cfg.theta_bounds);

    const double mu_int = grid_integral(fit.mu_kde, grid);
    const double ll = log_likelihood(cat, fit.mu_kde, fit.theta, mu_int);
    if (!std::isfinite(ll))
      throw NumericalError("em_fit: non-finite log likelihood");

    if (!fit.log_likelihood_trace.empty() && ll < prev_ll - 1e-6) {
      // Alternating update went downhill (the kernel-background rebuild is
      // heuristic and not guaranteed monotone): revert and stop.
      fit.p_background = prev_p;
      fit.theta = prev_theta;
      fit.mu_kde = prev_accepted_mu;
      fit.converged = true;
      break;
    }
    fit.log_likelihood_trace.push_back(ll);
    fit.n_iter = iter + 1;
    const bool small_change =
        std::isfinite(prev_ll) && std::abs(ll - prev_ll) < cfg.tol;
    prev_ll = ll;
    prev_p = fit.p_background;
    prev_theta = fit.theta;
    prev_accepted_mu = fit.mu_kde;
    if (small_change) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

MleFit em_fit(const Catalog& cat, const EmConfig& cfg) {
  // Two deterministic starts.  The box-center start can fall into a
  // flat-triggering mode (c at its upper bound, p < 1) where the Omori
  // kernel is nearly constant and absorbs background mass.  The second start
  // is background-dominant: a tiny K0 makes the first responsibility pass
  // assign nearly all mass to the background, so only event pairs whose
  // kernel density is far above the background (genuine aftershock pairs)
  // retain weight, and the triggering component grows from those alone.
  // K0 itself is re-profiled in the first M-step, so the tiny value only
  // shapes the initial weights.  The higher final observed-data likelihood
  // wins.
  const TriggeringParams a = em_default_init(cfg.theta_bounds);
  TriggeringParams b = a;
  auto inside = [&](double v, int k, double fallback) {
    return (v > cfg.theta_bounds[k][0] && v < cfg.theta_bounds[k][1])
               ? v
               : fallback;
  };
  b.K0 = inside(1e-5, 0, b.K0);
  b.c = inside(0.05, 1, b.c);
  b.p = inside(1.3, 2, b.p);
  b.d = inside(0.05, 4, b.d);
  b.q = inside(2.0, 6, b.q);

  MleFit fit_a = em_fit(cat, cfg, a);
  MleFit fit_b = em_fit(cat, cfg, b);
  if (fit_a.log_likelihood_trace.empty()) return fit_b;
  if (fit_b.log_likelihood_trace.empty()) return fit_a;
  return (fit_b.log_likelihood_trace.back() >
          fit_a.log_likelihood_trace.back())
             ? fit_b
             : fit_a;
}

}  // namespace gpetas
