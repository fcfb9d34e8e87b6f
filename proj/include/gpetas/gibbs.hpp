#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpetas/catalog.hpp"
#include "gpetas/gaussian_process.hpp"
#include "gpetas/triggering.hpp"

namespace gpetas {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Prior specification: Gamma(alpha0, beta0) on the intensity bound lambda_bar
// (beta0 is a rate), independent Exponential priors on the GP hyperparameters,
// and independent uniform priors on the seven triggering parameters.
struct Priors {
  double lambda_alpha0 = 1.0;
  double lambda_beta0 = 1.0;
  std::array<double, 3> nu_rates{0.2, 2.5, 2.5};
  // Bounds for (K0, c, p, alpha, d, gamma, q), in that order.
  std::array<std::array<double, 2>, 7> theta_bounds{{{0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {1.0, 10.0}}};

  void validate() const;
};

// Default priors: c_s = 1 (coefficient of variation of lambda_bar), prior
// mean E[lambda_bar] = 2 N / (|X||T|), Exponential rates (1/5, 5/2, 5/2) for
// nu, uniform boxes (0,10) per triggering parameter with q in (1,10).
Priors default_priors(std::size_t n_events, const DomainWindow& window);

// One full state of the augmented sampler.
struct GibbsState {
  std::vector<int> z;  // per event: 0 background, j >= 1 parent = event j-1
  Eigen::Matrix<double, Eigen::Dynamic, 2> pi_points;  // latent Poisson pts
  Eigen::VectorXd omega;  // PG variable per element of D then Pi; 0 triggered
  double lambda_bar = 1.0;
  GpFunctionValues f;  // points = event locations followed by pi_points
  GpHyperParams nu;
  TriggeringParams theta;

  std::size_t n_events() const { return z.size(); }
  std::size_t n_pi() const { return static_cast<std::size_t>(pi_points.rows()); }
};

struct GibbsConfig {
  std::uint64_t n_samples = 5000;  // post-burn-in sweeps
  std::uint64_t burn_in = 2000;
  std::uint64_t thin = 1;  // snapshot every thin-th post-burn-in sweep
  std::uint64_t seed = 0;
  int probe_nx = 50;
  int probe_ny = 50;
  double proposal_sd_nu = 0.05;     // log-space random-walk sd
  double proposal_sd_theta = 0.01;  // log-space random-walk sd
  int theta_steps = 10;             // MH proposals per sweep
  double jitter = kDefaultJitter;

  void validate() const;
};

// Thinned snapshot stored in the chain: scalars, branching, f at the event
// locations only, and the background drawn on the probe grid.
struct ChainSample {
  std::uint64_t iteration = 0;  // 1-based sweep index
  double lambda_bar = 0.0;
  GpHyperParams nu;
  TriggeringParams theta;
  std::vector<int> z;
  Eigen::VectorXd f_events;
  Eigen::VectorXd mu_probe;  // lambda_bar * sigmoid(f*) at probe centers
  std::size_t n_pi = 0;
};

// Lightweight per-sweep record kept for every post-burn-in sweep; posterior
// quantiles are computed from this full-resolution trace.
struct ScalarSample {
  double lambda_bar = 0.0;
  GpHyperParams nu;
  TriggeringParams theta;
};

struct PosteriorChain {
  std::vector<ChainSample> samples;
  std::vector<ScalarSample> scalar_trace;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;
  int probe_nx = 0;
  int probe_ny = 0;
  double accept_rate_nu = 0.0;
  double accept_rate_theta = 0.0;
};

// ---- Individual conditional steps (exposed for testing and diagnostics) ----

// z_i ~ Categorical(mu_i, phi_i1, ..., phi_i,i-1) / normalizer, independently
// per event, with mu_at_events the current lambda_bar * sigmoid(f_i).
std::vector<int> sample_branching(const Catalog& cat,
                                  const std::vector<double>& mu_at_events,
                                  const TriggeringParams& theta,
                                  RngStream& rng);

// Latent thinned-complement process: candidates ~ Poisson(lambda_bar |X||T|)
// uniform on X, f drawn jointly from the predictive conditional given f_state,
// candidate kept with probability sigmoid(-f).  Returns kept locations with
// their f values.  Throws NumericalError if the candidate count exceeds 2e6.
std::pair<Eigen::Matrix<double, Eigen::Dynamic, 2>, Eigen::VectorXd>
sample_latent_pi(double lambda_bar, const GpFunctionValues& f_state,
                 const GpHyperParams& nu, const DomainWindow& window,
                 RngStream& rng, double jitter = kDefaultJitter);

// omega ~ PG(1, |f|) at background events and Pi points; exactly 0 at
// triggered events.  f_all = values at events followed by Pi points.
Eigen::VectorXd sample_pg_variables(const std::vector<int>& z,
                                    const Eigen::VectorXd& f_all,
                                    RngStream& rng);

// lambda_bar ~ Gamma(n_bg_plus_pi + alpha0, |X||T| + beta0).
double sample_lambda_bar(std::size_t n_bg_plus_pi, const DomainWindow& window,
                         const Priors& priors, RngStream& rng);

// f ~ N((Omega + K^{-1})^{-1} u, (Omega + K^{-1})^{-1}) computed without
// forming K^{-1}: with K = L L^T and B = I + L^T Omega L = R R^T,
// the posterior is N(L B^{-1} L^T u, L B^{-1} L^T).
Eigen::VectorXd sample_f(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                         const Eigen::VectorXd& omega, const Eigen::VectorXd& u,
                         const GpHyperParams& nu, RngStream& rng,
                         double jitter = kDefaultJitter);

// Builds the +1/2 (background event) / 0 (triggered) / -1/2 (Pi) vector.
Eigen::VectorXd build_u_vector(const std::vector<int>& z, std::size_t n_pi);

// Log density (up to a constant) of the nu conditional:
// -f^T K^{-1} f / 2 - log det K / 2 + log p(nu).  Used by the MH step and by
// tests.  Throws NumericalError if the Gram factorization fails.
double nu_log_target(const GpFunctionValues& f, const GpHyperParams& nu,
                     const Priors& priors, double jitter = kDefaultJitter);

// One log-space Gaussian random-walk MH update of nu (all three components
// jointly).  Proposal factorization failure counts as rejection.
bool mh_hyperparameters(GpFunctionValues& f, GpHyperParams& nu,
                        const Priors& priors, double proposal_sd,
                        RngStream& rng, double jitter = kDefaultJitter);

// Z-conditioned log likelihood of theta (triggered-pair terms plus the
// integral term; no background terms).
double theta_log_target(const Catalog& cat, const std::vector<int>& z,
                        const TriggeringParams& theta);

// n_steps log-space random-walk MH updates of theta under uniform bounds.
// Returns the number of accepted proposals.
int mh_triggering(TriggeringParams& theta, const Catalog& cat,
                  const std::vector<int>& z, const Priors& priors,
                  double proposal_sd, int n_steps, RngStream& rng);

// Joint predictive draw of mu = lambda_bar * sigmoid(f*) at x_star given the
// state's f.
Eigen::VectorXd predictive_background(
    const GibbsState& state, const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star,
    RngStream& rng, double jitter = kDefaultJitter);

// ---- Orchestration ----

// Drives Algorithm-1 sweeps over a catalog and records the chain.  Checkpoint
// and per-sample callbacks are optional (used by the CLI for incremental
// output).
class GibbsSampler {
 public:
  GibbsSampler(const Catalog& cat, const Priors& priors,
               const GibbsConfig& config);

  // One full sweep: z -> Pi -> omega -> lambda_bar -> f -> nu -> theta.
  void sweep();

  // Snapshot of the current state including a fresh probe-grid draw.
  ChainSample snapshot();

  const GibbsState& state() const { return state_; }
  GibbsState& state() { return state_; }
  const GibbsConfig& config() const { return config_; }
  std::uint64_t iteration() const { return iteration_; }
  RngStream& rng() { return rng_; }
  const RngStream& rng() const { return rng_; }
  const Eigen::Matrix<double, Eigen::Dynamic, 2>& probe_points() const {
    return probe_points_;
  }
  std::uint64_t accepted_nu() const { return accepted_nu_; }
  std::uint64_t accepted_theta() const { return accepted_theta_; }
  std::uint64_t proposed_nu() const { return proposed_nu_; }
  std::uint64_t proposed_theta() const { return proposed_theta_; }
  // Post-burn-in per-sweep scalar record; survives checkpoint/resume so a
  // resumed run summarizes the full trace.
  const std::vector<ScalarSample>& scalar_trace() const {
    return scalar_trace_;
  }
  void set_scalar_trace(std::vector<ScalarSample> trace) {
    scalar_trace_ = std::move(trace);
  }
  void append_scalar(ScalarSample s) { scalar_trace_.push_back(std::move(s)); }

  // Restore a mid-run state (checkpoint resume).
  void restore(const GibbsState& state, std::uint64_t iteration,
               const std::string& rng_state, std::uint64_t accepted_nu,
               std::uint64_t proposed_nu, std::uint64_t accepted_theta,
               std::uint64_t proposed_theta);

 private:
  const Catalog& cat_;
  Priors priors_;
  GibbsConfig config_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> event_points_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> probe_points_;
  GibbsState state_;
  RngStream rng_;
  std::uint64_t iteration_ = 0;
  std::uint64_t accepted_nu_ = 0, proposed_nu_ = 0;
  std::uint64_t accepted_theta_ = 0, proposed_theta_ = 0;
  std::vector<ScalarSample> scalar_trace_;
};

struct GibbsCallbacks {
  // Called after each stored snapshot.
  std::function<void(const ChainSample&)> on_sample;
  // Called when a checkpoint should be written (every checkpoint_every
  // iterations and at the end); receives the sampler.
  std::function<void(const GibbsSampler&)> on_checkpoint;
  std::uint64_t checkpoint_every = 0;  // 0 = only at end (if callback set)
};

// Runs burn_in + n_samples sweeps (resuming from the sampler's current
// iteration), storing thinned post-burn-in snapshots and the full scalar
// trace.  On a step failure, rethrows with the iteration index appended and
// (if a checkpoint callback is set) writes a final checkpoint first.
PosteriorChain run_gibbs(GibbsSampler& sampler,
                         const GibbsCallbacks& callbacks = {});

// Convenience: fresh sampler + run.
PosteriorChain run_gibbs(const Catalog& cat, const Priors& priors,
                         const GibbsConfig& config,
                         const GibbsCallbacks& callbacks = {});

}  // namespace gpetas
