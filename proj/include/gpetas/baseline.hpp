#pragma once

#include <array>
#include <string>
#include <vector>

#include "gpetas/catalog.hpp"
#include "gpetas/evaluation.hpp"
#include "gpetas/triggering.hpp"

namespace gpetas {

// Adaptive-bandwidth KDE settings for the classical ETAS background.
struct KdeConfig {
  int n_p = 15;        // nearest-neighbor order for the adaptive bandwidth
  double d_min = 0.05;  // minimal bandwidth (classical variant)
  enum class Variant { classical, silverman };
  Variant variant = Variant::classical;

  void validate() const;
};

struct EmConfig {
  KdeConfig kde;
  double tol = 1e-6;
  int max_iter = 200;
  int grid_nx = 50;  // Riemann grid for the mu integral in the likelihood
  int grid_ny = 50;
  // Feasible box for theta; defaults match the GP-ETAS prior bounds.
  std::array<std::array<double, 2>, 7> theta_bounds{{{0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {0.0, 10.0},
                                                     {1.0, 10.0}}};
};

// Result of the EM-style maximum-likelihood fit.
struct MleFit {
  TriggeringParams theta;
  std::vector<double> p_background;   // p_i0 per event
  std::vector<double> bandwidths;     // d_i per event
  BackgroundField mu_kde;
  std::vector<double> log_likelihood_trace;  // observed-data, per iteration
  bool converged = false;
  int n_iter = 0;
};

// d_i = max(d_floor, distance to the n_p-th nearest neighbor of event i).
// classical: d_floor = cfg.d_min; silverman: d_floor = Silverman's rule
// 1.06 sd n^{-1/5}, averaged over the two coordinates.  Throws ConfigError
// when the catalog has fewer than n_p + 1 events.
std::vector<double> adaptive_bandwidths(const Catalog& cat,
                                        const KdeConfig& cfg);

// mu_kde(x) = (1/t_window_length) sum_i p_i0 N(x; x_i, d_i^2 I).
BackgroundField kde_background(const Catalog& cat,
                               const std::vector<double>& p_background,
                               const std::vector<double>& bandwidths,
                               double t_window_length);

// Log-space geometric center of the feasible box with the lower bounds
// floored at 0.01 (the default boxes have zero lower bounds).
TriggeringParams em_default_init(
    const std::array<std::array<double, 2>, 7>& bounds);

// Alternating EM-style fit: (E) branching probabilities under the current
// KDE background and theta; (M) background from p_i0 and theta by
// coordinate-wise log-space line search on the expected complete-data log
// likelihood.  Records the observed-data log likelihood per iteration; if an
// update decreases it by more than 1e-6 the update is reverted and the fit
// stops (the alternating background update is not a strict EM ascent).
MleFit em_fit(const Catalog& cat, const EmConfig& cfg,
              const TriggeringParams& init_theta);
MleFit em_fit(const Catalog& cat, const EmConfig& cfg);  // default init

}  // namespace gpetas
