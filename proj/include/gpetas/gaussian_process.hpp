#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpetas/errors.hpp"
#include "gpetas/rng.hpp"

namespace gpetas {

// Hyperparameters of the Gaussian covariance (amplitude + per-axis length
// scales): k(x, x') = nu0 exp(-dx^2/(2 nu1^2)) exp(-dy^2/(2 nu2^2)).
struct GpHyperParams {
  double nu0 = 1.0;
  double nu1 = 1.0;
  double nu2 = 1.0;

  void validate() const;
};

// GP function values f aligned with a list of planar points.
struct GpFunctionValues {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;  // J x 2
  Eigen::VectorXd values;                           // J

  Eigen::Index size() const { return values.size(); }
};

inline constexpr double kDefaultJitter = 1e-6;  // relative to nu0
inline constexpr double kMaxJitter = 1e-3;      // escalation ceiling

double covariance(double ax, double ay, double bx, double by,
                  const GpHyperParams& nu);

// Dense Gram matrix K[i][j] = covariance(p_i, p_j) + jitter*nu0*1{i=j}.
Eigen::MatrixXd gram_matrix(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
    const GpHyperParams& nu, double jitter);

// Gram matrix with a successful Cholesky factorization.  The requested jitter
// is escalated x10 (up to 1e-3 relative to nu0) until the factorization
// succeeds; NumericalError if even the ceiling fails.
class GramChol {
 public:
  GramChol(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
           const GpHyperParams& nu, double jitter = kDefaultJitter);

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  Eigen::Index size() const { return n_; }
  double jitter_used() const { return jitter_used_; }

  // log det K from the Cholesky factor.
  double log_det() const;
  // K^{-1} b via triangular solves.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  // Lower factor L with K = L L^T.
  Eigen::MatrixXd matrixL() const { return llt_.matrixL(); }

 private:
  Eigen::Index n_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_used_;
};

// f ~ N(0, K) at the given points via f = L z.
GpFunctionValues sample_prior(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
    const GpHyperParams& nu, RngStream& rng, double jitter = kDefaultJitter);

struct PredictiveGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetrized (C + C^T)/2
};

// Conditional N(K*f Kff^{-1} f, K** - K*f Kff^{-1} Kf*) of the GP at x_star
// given observed values.  f_obs must be non-empty.
PredictiveGaussian predictive_conditional(
    const GpFunctionValues& f_obs,
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star,
    const GpHyperParams& nu, double jitter = kDefaultJitter);

// One joint draw from N(mean, cov) with jitter-escalated factorization of cov
// (cov from a predictive conditional may be numerically semidefinite).
Eigen::VectorXd sample_gaussian(const PredictiveGaussian& g, double nu0,
                                RngStream& rng,
                                double jitter = kDefaultJitter);

// Joint predictive draw at x_star given f_obs; falls back to a prior draw
// when f_obs is empty.
Eigen::VectorXd sample_predictive(
    const GpFunctionValues& f_obs,
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star,
    const GpHyperParams& nu, RngStream& rng, double jitter = kDefaultJitter);

}  // namespace gpetas
