#include "gpetas/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpetas/errors.hpp"
#include "gpetas/evaluation.hpp"
#include "gpetas/polya_gamma.hpp"

namespace gpetas {

void Priors::validate() const {
  if (!(lambda_alpha0 > 0.0) || !(lambda_beta0 > 0.0))
    throw ConfigError("priors: lambda_bar Gamma parameters must be > 0");
  for (double r : nu_rates)
    if (!(r > 0.0)) throw ConfigError("priors: nu rates must be > 0");
  for (const auto& b : theta_bounds)
    if (!(b[1] > b[0]))
      throw ConfigError("priors: theta bounds must be ordered lo < hi");
  if (theta_bounds[6][0] < 1.0)
    throw ConfigError("priors: q lower bound must be >= 1");
}

Priors default_priors(std::size_t n_events, const DomainWindow& window) {
  if (n_events == 0)
    throw ConfigError("default_priors: catalog must be non-empty");
  window.validate();
  Priors p;
  // c_s = 1: shape 1/c_s^2 = 1; prior mean 2N/(|X||T|) -> rate = 1/mean.
  const double mean = 2.0 * static_cast<double>(n_events) /
                      (window.area() * window.duration());
  p.lambda_alpha0 = 1.0;
  p.lambda_beta0 = 1.0 / mean;
  p.nu_rates = {1.0 / 5.0, 5.0 / 2.0, 5.0 / 2.0};
  return p;
}

void GibbsConfig::validate() const {
  if (thin == 0) throw ConfigError("gibbs: thin must be >= 1");
  if (probe_nx < 2 || probe_ny < 2)
    throw ConfigError("gibbs: probe grid must be at least 2x2");
  if (!(proposal_sd_nu > 0.0) || !(proposal_sd_theta > 0.0))
    throw ConfigError("gibbs: proposal sds must be > 0");
  if (theta_steps < 1) throw ConfigError("gibbs: theta_steps must be >= 1");
  if (!(jitter >= 0.0)) throw ConfigError("gibbs: jitter must be >= 0");
}

std::vector<int> sample_branching(const Catalog& cat,
                                  const std::vector<double>& mu_at_events,
                                  const TriggeringParams& theta,
                                  RngStream& rng) {
  const std::size_t n = cat.events.size();
  if (mu_at_events.size() != n)
    throw ConfigError("sample_branching: mu vector size mismatch");
  const double m0 = cat.window.m0;
  std::vector<int> z(n, 0);
  std::vector<double> probs;
  for (std::size_t i = 0; i < n; ++i) {
    const Event& ei = cat.events[i];
    probs.assign(i + 1, 0.0);
    probs[0] = mu_at_events[i];
    double total = probs[0];
    for (std::size_t j = 0; j < i; ++j) {
      const Event& ej = cat.events[j];
      probs[j + 1] = triggering_phi(ei.t - ej.t, ei.x - ej.x, ei.y - ej.y,
                                    ej.m, theta, m0);
      total += probs[j + 1];
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw NumericalError("sample_branching: degenerate intensity at event " +
                           std::to_string(i));
    double u = rng.uniform() * total;
    std::size_t k = 0;
    for (; k < i; ++k) {
      if (u < probs[k]) break;
      u -= probs[k];
    }
    z[i] = static_cast<int>(k);
  }
  return z;
}

std::pair<Eigen::Matrix<double, Eigen::Dynamic, 2>, Eigen::VectorXd>
sample_latent_pi(double lambda_bar, const GpFunctionValues& f_state,
                 const GpHyperParams& nu, const DomainWindow& window,
                 RngStream& rng, double jitter) {
  const double volume = window.area() * window.duration();
  const double mean_cand = lambda_bar * volume;
  if (!(mean_cand >= 0.0) || mean_cand > 2e6)
    throw NumericalError(
        "sample_latent_pi: candidate mean " + std::to_string(mean_cand) +
        " out of range (lambda_bar = " + std::to_string(lambda_bar) + ")");
  const long n_cand = rng.poisson(mean_cand);

  Eigen::Matrix<double, Eigen::Dynamic, 2> cand(n_cand, 2);
  for (long i = 0; i < n_cand; ++i) {
    cand(i, 0) = rng.uniform(window.x_range[0], window.x_range[1]);
    cand(i, 1) = rng.uniform(window.y_range[0], window.y_range[1]);
  }
  Eigen::VectorXd f_cand = sample_predictive(f_state, cand, nu, rng, jitter);

  std::vector<long> keep;
  keep.reserve(n_cand);
  for (long i = 0; i < n_cand; ++i)
    if (rng.uniform() < sigmoid(-f_cand(i))) keep.push_back(i);

  Eigen::Matrix<double, Eigen::Dynamic, 2> pts(keep.size(), 2);
  Eigen::VectorXd fv(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pts.row(r) = cand.row(keep[r]);
    fv(r) = f_cand(keep[r]);
  }
  return {pts, fv};
}

Eigen::VectorXd sample_pg_variables(const std::vector<int>& z,
                                    const Eigen::VectorXd& f_all,
                                    RngStream& rng) {
  const std::size_t n = z.size();
  if (f_all.size() < static_cast<Eigen::Index>(n))
    throw ConfigError("sample_pg_variables: f vector shorter than catalog");
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(f_all.size());
  for (std::size_t i = 0; i < n; ++i)
    if (z[i] == 0) omega(i) = sample_pg(std::abs(f_all(i)), rng);
  for (Eigen::Index l = static_cast<Eigen::Index>(n); l < f_all.size(); ++l)
    omega(l) = sample_pg(std::abs(f_all(l)), rng);
  return omega;
}

double sample_lambda_bar(std::size_t n_bg_plus_pi, const DomainWindow& window,
                         const Priors& priors, RngStream& rng) {
  const double shape = static_cast<double>(n_bg_plus_pi) + priors.lambda_alpha0;
  const double rate = window.area() * window.duration() + priors.lambda_beta0;
  return rng.gamma(shape, rate);
}

Eigen::VectorXd build_u_vector(const std::vector<int>& z, std::size_t n_pi) {
  Eigen::VectorXd u(z.size() + n_pi);
  for (std::size_t i = 0; i < z.size(); ++i)
    u(i) = (z[i] == 0) ? 0.5 : 0.0;
  for (std::size_t l = 0; l < n_pi; ++l) u(z.size() + l) = -0.5;
  return u;
}

Eigen::VectorXd sample_f(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                         const Eigen::VectorXd& omega, const Eigen::VectorXd& u,
                         const GpHyperParams& nu, RngStream& rng,
                         double jitter) {
  const Eigen::Index n = points.rows();
  if (omega.size() != n || u.size() != n)
    throw ConfigError("sample_f: vector sizes do not match point count");
  if (n == 0) return Eigen::VectorXd();

  GramChol chol(points, nu, jitter);
  const Eigen::MatrixXd L = chol.matrixL();
  // B = I + L^T Omega L; posterior covariance (Omega + K^{-1})^{-1} equals
  // L B^{-1} L^T, so a draw is L B^{-1} L^T u + L B^{-T/2} z.
  Eigen::MatrixXd OL = omega.asDiagonal() * L;
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) + L.transpose() * OL;
  Eigen::LLT<Eigen::MatrixXd> bllt(B);
  if (bllt.info() != Eigen::Success)
    throw NumericalError("sample_f: factorization of I + L^T Omega L failed");

  Eigen::VectorXd mean = L * bllt.solve(L.transpose() * u);
  Eigen::VectorXd zvec(n);
  for (Eigen::Index i = 0; i < n; ++i) zvec(i) = rng.normal();
  Eigen::VectorXd w =
      bllt.matrixU().solve(zvec);  // (L_B^T)^{-1} z: covariance L B^{-1} L^T
  return mean + L * w;
}

double nu_log_target(const GpFunctionValues& f, const GpHyperParams& nu,
                     const Priors& priors, double jitter) {
  nu.validate();
  double lp = 0.0;
  const double nus[3] = {nu.nu0, nu.nu1, nu.nu2};
  for (int k = 0; k < 3; ++k)
    lp += std::log(priors.nu_rates[k]) - priors.nu_rates[k] * nus[k];
  if (f.size() == 0) return lp;
  GramChol chol(f.points, nu, jitter);
  const Eigen::VectorXd Kinv_f = chol.solve(f.values);
  return -0.5 * f.values.dot(Kinv_f) - 0.5 * chol.log_det() + lp;
}

bool mh_hyperparameters(GpFunctionValues& f, GpHyperParams& nu,
                        const Priors& priors, double proposal_sd,
                        RngStream& rng, double jitter) {
  const double cur = nu_log_target(f, nu, priors, jitter);
  const double eta[3] = {std::log(nu.nu0), std::log(nu.nu1), std::log(nu.nu2)};
  double eta_prop[3];
  for (int k = 0; k < 3; ++k) eta_prop[k] = eta[k] + proposal_sd * rng.normal();
  GpHyperParams prop{std::exp(eta_prop[0]), std::exp(eta_prop[1]),
                     std::exp(eta_prop[2])};
  double prop_target;
  try {
    prop_target = nu_log_target(f, prop, priors, jitter);
  } catch (const NumericalError&) {
    return false;  // factorization failure counts as rejection
  }
  double log_ratio = prop_target - cur;
  for (int k = 0; k < 3; ++k) log_ratio += eta_prop[k] - eta[k];  // Jacobian
  if (std::log(rng.uniform()) < log_ratio) {
    nu = prop;
    return true;
  }
  return false;
}

double theta_log_target(const Catalog& cat, const std::vector<int>& z,
                        const TriggeringParams& theta) {
  const double m0 = cat.window.m0;
  const double t_max = cat.window.t_range[1];
  double ll = 0.0;
  for (std::size_t i = 0; i < cat.events.size(); ++i) {
    const Event& ei = cat.events[i];
    if (z[i] != 0) {
      const Event& ep = cat.events.at(static_cast<std::size_t>(z[i]) - 1);
      const double phi = triggering_phi(ei.t - ep.t, ei.x - ep.x, ei.y - ep.y,
                                        ep.m, theta, m0);
      if (!(phi > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += std::log(phi);
    }
    ll -= integrated_triggering(ei.t, ei.m, t_max, theta, m0);
  }
  return ll;
}

namespace {

// Precomputed geometry of the Z-conditioned theta likelihood: per triggered
// pair (dt, r^2, parent m - m0) and per event (m - m0, t_max - t).
struct ThetaTargetData {
  std::vector<double> dt, r2, dm_parent;
  std::vector<double> dm_event, horizon;

  ThetaTargetData(const Catalog& cat, const std::vector<int>& z) {
    const double m0 = cat.window.m0;
    const double t_max = cat.window.t_range[1];
    for (std::size_t i = 0; i < cat.events.size(); ++i) {
      const Event& ei = cat.events[i];
      if (z[i] != 0) {
        const Event& ep = cat.events.at(static_cast<std::size_t>(z[i]) - 1);
        dt.push_back(ei.t - ep.t);
        const double ddx = ei.x - ep.x, ddy = ei.y - ep.y;
        r2.push_back(ddx * ddx + ddy * ddy);
        dm_parent.push_back(ep.m - m0);
      }
      dm_event.push_back(ei.m - m0);
      horizon.push_back(t_max - ei.t);
    }
  }

  double log_target(const TriggeringParams& th) const {
    const double ln10 = std::log(10.0);
    double ll = 0.0;
    for (std::size_t k = 0; k < dt.size(); ++k) {
      const double ln_sigma = 2.0 * std::log(th.d) +
                              2.0 * th.gamma * dm_parent[k] * ln10;
      const double sigma = std::exp(ln_sigma);
      ll += std::log(th.K0) + th.alpha * dm_parent[k] -
            th.p * std::log(dt[k] + th.c) + std::log(th.q - 1.0) -
            std::log(M_PI) - ln_sigma - th.q * std::log1p(r2[k] / sigma);
    }
    for (std::size_t i = 0; i < dm_event.size(); ++i)
      ll -= th.K0 * std::exp(th.alpha * dm_event[i]) *
            omori_integral(horizon[i], th.c, th.p);
    return ll;
  }
};

void theta_to_array(const TriggeringParams& th, double* a) {
  a[0] = th.K0; a[1] = th.c; a[2] = th.p; a[3] = th.alpha;
  a[4] = th.d; a[5] = th.gamma; a[6] = th.q;
}

TriggeringParams theta_from_array(const double* a) {
  TriggeringParams th;
  th.K0 = a[0]; th.c = a[1]; th.p = a[2]; th.alpha = a[3];
  th.d = a[4]; th.gamma = a[5]; th.q = a[6];
  return th;
}

}  // namespace

int mh_triggering(TriggeringParams& theta, const Catalog& cat,
                  const std::vector<int>& z, const Priors& priors,
                  double proposal_sd, int n_steps, RngStream& rng) {
  if (z.size() != cat.events.size())
    throw ConfigError("mh_triggering: z size mismatch");
  const ThetaTargetData data(cat, z);

  double cur_arr[7];
  theta_to_array(theta, cur_arr);
  double cur_target = data.log_target(theta);
  int accepted = 0;

  for (int s = 0; s < n_steps; ++s) {
    double prop_arr[7];
    double jac = 0.0;
    bool in_bounds = true;
    for (int k = 0; k < 7; ++k) {
      const double eta = std::log(cur_arr[k]);
      const double eta_prop = eta + proposal_sd * rng.normal();
      prop_arr[k] = std::exp(eta_prop);
      jac += eta_prop - eta;
      const auto& b = priors.theta_bounds[k];
      if (!(prop_arr[k] > b[0] && prop_arr[k] < b[1])) in_bounds = false;
    }
    if (!in_bounds) continue;  // zero prior density: reject
    const TriggeringParams prop = theta_from_array(prop_arr);
    const double prop_target = data.log_target(prop);
    if (std::log(rng.uniform()) < prop_target - cur_target + jac) {
      std::copy(prop_arr, prop_arr + 7, cur_arr);
      cur_target = prop_target;
      ++accepted;
    }
  }
  theta = theta_from_array(cur_arr);
  return accepted;
}

Eigen::VectorXd predictive_background(
    const GibbsState& state,
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star, RngStream& rng,
    double jitter) {
  Eigen::VectorXd fs = sample_predictive(state.f, x_star, state.nu, rng, jitter);
  Eigen::VectorXd mu(fs.size());
  for (Eigen::Index i = 0; i < fs.size(); ++i)
    mu(i) = state.lambda_bar * sigmoid(fs(i));
  return mu;
}

GibbsSampler::GibbsSampler(const Catalog& cat, const Priors& priors,
                           const GibbsConfig& config)
    : cat_(cat), priors_(priors), config_(config) {
  if (cat_.events.empty())
    throw ConfigError("gibbs: catalog must be non-empty");
  cat_.validate();
  priors_.validate();
  config_.validate();

  const std::size_t n = cat_.events.size();
  event_points_.resize(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    event_points_(i, 0) = cat_.events[i].x;
    event_points_(i, 1) = cat_.events[i].y;
  }
  probe_points_ =
      EvalGrid(config_.probe_nx, config_.probe_ny, cat_.window).centers();

  rng_ = RngStream(config_.seed);
  // Initialization from the priors; f starts at the prior mean (zero) at the
  // event locations with an empty Pi.
  state_.lambda_bar = rng_.gamma(priors_.lambda_alpha0, priors_.lambda_beta0);
  double* theta_fields[7] = {&state_.theta.K0,    &state_.theta.c,
                             &state_.theta.p,     &state_.theta.alpha,
                             &state_.theta.d,     &state_.theta.gamma,
                             &state_.theta.q};
  for (int k = 0; k < 7; ++k) {
    const auto& b = priors_.theta_bounds[k];
    double v = rng_.uniform(b[0], b[1]);
    if (v <= b[0]) v = std::nextafter(b[0], b[1]);
    *theta_fields[k] = v;
  }
  state_.nu.nu0 = rng_.exponential(priors_.nu_rates[0]);
  state_.nu.nu1 = rng_.exponential(priors_.nu_rates[1]);
  state_.nu.nu2 = rng_.exponential(priors_.nu_rates[2]);
  state_.z.assign(n, 0);
  state_.pi_points.resize(0, 2);
  state_.f.points = event_points_;
  state_.f.values = Eigen::VectorXd::Zero(n);
  state_.omega = Eigen::VectorXd::Zero(n);
}

void GibbsSampler::sweep() {
  const std::size_t n = cat_.events.size();
  const DomainWindow& w = cat_.window;

  // 1. Branching given mu(x_i) = lambda_bar sigmoid(f_i) and theta.
  std::vector<double> mu_ev(n);
  for (std::size_t i = 0; i < n; ++i)
    mu_ev[i] = state_.lambda_bar * sigmoid(state_.f.values(i));
  std::vector<int> z = sample_branching(cat_, mu_ev, state_.theta, rng_);

  // 2. Latent Pi given lambda_bar and f at the event locations (previous Pi
  //    values are discarded with their points).
  GpFunctionValues f_events;
  f_events.points = event_points_;
  f_events.values = state_.f.values.head(n);
  auto [pi_pts, f_pi] = sample_latent_pi(state_.lambda_bar, f_events,
                                         state_.nu, w, rng_, config_.jitter);
  const std::size_t m = static_cast<std::size_t>(pi_pts.rows());

  // 3. PG variables at D then Pi.
  Eigen::VectorXd f_all(n + m);
  f_all.head(n) = state_.f.values.head(n);
  f_all.tail(m) = f_pi;
  Eigen::VectorXd omega = sample_pg_variables(z, f_all, rng_);

  // 4. lambda_bar given the background + Pi count.
  std::size_t n_bg = 0;
  for (int zi : z)
    if (zi == 0) ++n_bg;
  state_.lambda_bar = sample_lambda_bar(n_bg + m, w, priors_, rng_);

  // 5. f jointly at D u Pi.
  Eigen::Matrix<double, Eigen::Dynamic, 2> points(n + m, 2);
  points.topRows(n) = event_points_;
  points.bottomRows(m) = pi_pts;
  const Eigen::VectorXd u = build_u_vector(z, m);
  Eigen::VectorXd f_new =
      sample_f(points, omega, u, state_.nu, rng_, config_.jitter);
  state_.f.points = points;
  state_.f.values = f_new;

  // 6. GP hyperparameters.
  ++proposed_nu_;
  if (mh_hyperparameters(state_.f, state_.nu, priors_, config_.proposal_sd_nu,
                         rng_, config_.jitter))
    ++accepted_nu_;

  // 7. Triggering parameters (mu(x_i) for the next sweep is implied by the
  //    updated lambda_bar and f).
  proposed_theta_ += config_.theta_steps;
  accepted_theta_ +=
      mh_triggering(state_.theta, cat_, z, priors_, config_.proposal_sd_theta,
                    config_.theta_steps, rng_);

  state_.z = std::move(z);
  state_.pi_points = std::move(pi_pts);
  state_.omega = std::move(omega);
  ++iteration_;
}

ChainSample GibbsSampler::snapshot() {
  ChainSample s;
  s.iteration = iteration_;
  s.lambda_bar = state_.lambda_bar;
  s.nu = state_.nu;
  s.theta = state_.theta;
  s.z = state_.z;
  s.f_events = state_.f.values.head(cat_.events.size());
  s.mu_probe = predictive_background(state_, probe_points_, rng_,
                                     config_.jitter);
  s.n_pi = state_.n_pi();
  return s;
}

void GibbsSampler::restore(const GibbsState& state, std::uint64_t iteration,
                           const std::string& rng_state,
                           std::uint64_t accepted_nu, std::uint64_t proposed_nu,
                           std::uint64_t accepted_theta,
                           std::uint64_t proposed_theta) {
  state_ = state;
  iteration_ = iteration;
  rng_.restore_state(rng_state);
  accepted_nu_ = accepted_nu;
  proposed_nu_ = proposed_nu;
  accepted_theta_ = accepted_theta;
  proposed_theta_ = proposed_theta;
}

namespace {

PosteriorChain drive(GibbsSampler& sampler, const GibbsConfig& config,
                     const GibbsCallbacks& callbacks) {
  PosteriorChain chain;
  chain.burn_in = config.burn_in;
  chain.thin = config.thin;
  chain.seed = config.seed;
  chain.probe_nx = config.probe_nx;
  chain.probe_ny = config.probe_ny;

  const std::uint64_t total = config.burn_in + config.n_samples;
  while (sampler.iteration() < total) {
    try {
      sampler.sweep();
    } catch (const Error& e) {
      if (callbacks.on_checkpoint) callbacks.on_checkpoint(sampler);
      throw NumericalError(std::string(e.what()) + " (at sweep " +
                           std::to_string(sampler.iteration() + 1) + ")");
    }
    const std::uint64_t it = sampler.iteration();
    if (it > config.burn_in) {
      const GibbsState& st = sampler.state();
      sampler.append_scalar(ScalarSample{st.lambda_bar, st.nu, st.theta});
      if ((it - config.burn_in) % config.thin == 0) {
        ChainSample s = sampler.snapshot();
        if (callbacks.on_sample) callbacks.on_sample(s);
        chain.samples.push_back(std::move(s));
      }
    }
    if (callbacks.on_checkpoint && callbacks.checkpoint_every > 0 &&
        it % callbacks.checkpoint_every == 0)
      callbacks.on_checkpoint(sampler);
  }
  if (callbacks.on_checkpoint) callbacks.on_checkpoint(sampler);

  chain.scalar_trace = sampler.scalar_trace();
  chain.accept_rate_nu =
      sampler.proposed_nu() ? static_cast<double>(sampler.accepted_nu()) /
                                  static_cast<double>(sampler.proposed_nu())
                            : 0.0;
  chain.accept_rate_theta =
      sampler.proposed_theta()
          ? static_cast<double>(sampler.accepted_theta()) /
                static_cast<double>(sampler.proposed_theta())
          : 0.0;
  return chain;
}

}  // namespace

PosteriorChain run_gibbs(GibbsSampler& sampler,
                         const GibbsCallbacks& callbacks) {
  return drive(sampler, sampler.config(), callbacks);
}

PosteriorChain run_gibbs(const Catalog& cat, const Priors& priors,
                         const GibbsConfig& config,
                         const GibbsCallbacks& callbacks) {
  GibbsSampler sampler(cat, priors, config);
  return run_gibbs(sampler, callbacks);
}

}  // namespace gpetas
