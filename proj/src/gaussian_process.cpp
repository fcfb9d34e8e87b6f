#include "gpetas/gaussian_process.hpp"

#include <cmath>
#include <string>

namespace gpetas {

void GpHyperParams::validate() const {
  if (!(nu0 > 0.0) || !(nu1 > 0.0) || !(nu2 > 0.0))
    throw ConfigError("gp: hyperparameters must be strictly positive");
}

double covariance(double ax, double ay, double bx, double by,
                  const GpHyperParams& nu) {
  const double dx = ax - bx;
  const double dy = ay - by;
  return nu.nu0 * std::exp(-dx * dx / (2.0 * nu.nu1 * nu.nu1) -
                           dy * dy / (2.0 * nu.nu2 * nu.nu2));
}

Eigen::MatrixXd gram_matrix(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
    const GpHyperParams& nu, double jitter) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = nu.nu0 * (1.0 + jitter);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = covariance(points(i, 0), points(i, 1), points(j, 0),
                                  points(j, 1), nu);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

GramChol::GramChol(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                   const GpHyperParams& nu, double jitter)
    : n_(points.rows()) {
  nu.validate();
  if (n_ == 0) throw ConfigError("gram: empty point set");
  Eigen::MatrixXd K = gram_matrix(points, nu, 0.0);
  double j = jitter;
  for (;;) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += j * nu.nu0;
    llt_.compute(Kj);
    if (llt_.info() == Eigen::Success) {
      jitter_used_ = j;
      return;
    }
    if (j >= kMaxJitter)
      throw NumericalError(
          "gram: Cholesky failed after jitter escalation to " +
          std::to_string(j) + " (relative), n = " + std::to_string(n_));
    j = (j <= 0.0) ? kDefaultJitter : j * 10.0;
    if (j > kMaxJitter) j = kMaxJitter;
  }
}

double GramChol::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd GramChol::solve(const Eigen::VectorXd& b) const {
  return llt_.solve(b);
}

Eigen::MatrixXd GramChol::solve(const Eigen::MatrixXd& b) const {
  return llt_.solve(b);
}

GpFunctionValues sample_prior(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
    const GpHyperParams& nu, RngStream& rng, double jitter) {
  GpFunctionValues out;
  out.points = points;
  const Eigen::Index n = points.rows();
  out.values.resize(n);
  if (n == 0) return out;
  GramChol chol(points, nu, jitter);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  out.values = chol.llt().matrixL() * z;
  return out;
}

PredictiveGaussian predictive_conditional(
    const GpFunctionValues& f_obs,
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star,
    const GpHyperParams& nu, double jitter) {
  if (f_obs.size() == 0)
    throw ConfigError("predictive_conditional: empty observation set");
  const Eigen::Index n = f_obs.size();
  const Eigen::Index m = x_star.rows();
  PredictiveGaussian out;
  out.mean.resize(m);
  out.cov.resize(m, m);
  if (m == 0) return out;

  GramChol chol(f_obs.points, nu, jitter);
  Eigen::MatrixXd Ksf(m, n);  // cross-covariance K(x_star, points)
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      Ksf(i, j) = covariance(x_star(i, 0), x_star(i, 1), f_obs.points(j, 0),
                             f_obs.points(j, 1), nu);
  Eigen::MatrixXd Kss(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Kss(i, i) = nu.nu0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = covariance(x_star(i, 0), x_star(i, 1), x_star(j, 0),
                                  x_star(j, 1), nu);
      Kss(i, j) = v;
      Kss(j, i) = v;
    }
  }
  out.mean = Ksf * chol.solve(f_obs.values);
  const Eigen::MatrixXd KsfT = Ksf.transpose();
  Eigen::MatrixXd C = Kss - Ksf * chol.solve(KsfT);
  out.cov = 0.5 * (C + C.transpose());
  return out;
}

Eigen::VectorXd sample_gaussian(const PredictiveGaussian& g, double nu0,
                                RngStream& rng, double jitter) {
  const Eigen::Index m = g.mean.size();
  if (m == 0) return Eigen::VectorXd();
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
  double j = jitter;
  for (;;) {
    Eigen::MatrixXd C = g.cov;
    C.diagonal().array() += j * nu0;
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() == Eigen::Success)
      return g.mean + Eigen::MatrixXd(llt.matrixL()) * z;
    if (j >= kMaxJitter)
      throw NumericalError(
          "sample_gaussian: covariance factorization failed at ceiling "
          "jitter");
    j = (j <= 0.0) ? kDefaultJitter : j * 10.0;
    if (j > kMaxJitter) j = kMaxJitter;
  }
}

Eigen::VectorXd sample_predictive(
    const GpFunctionValues& f_obs,
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& x_star,
    const GpHyperParams& nu, RngStream& rng, double jitter) {
  if (x_star.rows() == 0) return Eigen::VectorXd();
  if (f_obs.size() == 0) return sample_prior(x_star, nu, rng, jitter).values;
  PredictiveGaussian g = predictive_conditional(f_obs, x_star, nu, jitter);
  return sample_gaussian(g, nu.nu0, rng, jitter);
}

}  // namespace gpetas
