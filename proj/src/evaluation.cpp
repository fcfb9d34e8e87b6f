#include "gpetas/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "gpetas/errors.hpp"

namespace gpetas {

EvalGrid::EvalGrid(int nx_, int ny_, const DomainWindow& w)
    : nx(nx_), ny(ny_), window(w) {
  if (nx < 2 || ny < 2) throw ConfigError("grid: nx and ny must be >= 2");
  window.validate();
}

Eigen::Matrix<double, Eigen::Dynamic, 2> EvalGrid::centers() const {
  Eigen::Matrix<double, Eigen::Dynamic, 2> pts(n_cells(), 2);
  const double dx = (window.x_range[1] - window.x_range[0]) / nx;
  const double dy = (window.y_range[1] - window.y_range[0]) / ny;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      pts(iy * nx + ix, 0) = window.x_range[0] + (ix + 0.5) * dx;
      pts(iy * nx + ix, 1) = window.y_range[0] + (iy + 0.5) * dy;
    }
  return pts;
}

int EvalGrid::cell_index(double x, double y) const {
  const double dx = (window.x_range[1] - window.x_range[0]) / nx;
  const double dy = (window.y_range[1] - window.y_range[0]) / ny;
  int ix = static_cast<int>(std::floor((x - window.x_range[0]) / dx));
  int iy = static_cast<int>(std::floor((y - window.y_range[0]) / dy));
  ix = std::clamp(ix, 0, nx - 1);
  iy = std::clamp(iy, 0, ny - 1);
  return iy * nx + ix;
}

double grid_integral(const BackgroundField& mu, const EvalGrid& grid) {
  const auto pts = grid.centers();
  double s = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) s += mu(pts(i, 0), pts(i, 1));
  return s * grid.cell_area();
}

BackgroundField make_grid_field(const Eigen::VectorXd& values,
                                const EvalGrid& grid) {
  if (values.size() != grid.n_cells())
    throw ConfigError("grid field: value count does not match grid size");
  auto eval = [values, grid](double x, double y) {
    return values(grid.cell_index(x, y));
  };
  return BackgroundField{std::move(eval), "grid"};
}

double test_log_likelihood_point(const BackgroundField& mu,
                                 const TriggeringParams& theta,
                                 const Catalog& test, const Catalog& history,
                                 const EvalGrid& grid) {
  const double t0 = test.window.t_range[0];
  const double t1 = test.window.t_range[1];
  const double m0 = test.window.m0;
  for (const Event& h : history.events)
    if (h.t > t0)
      throw ConfigError(
          "test likelihood: history event inside the test window");

  double ll = -test.window.duration() * grid_integral(mu, grid);

  // Residual offspring integrals of history events over [t0, t1].
  for (const Event& h : history.events)
    ll -= productivity(h.m, theta, m0) *
          (omori_integral(t1 - h.t, theta.c, theta.p) -
           omori_integral(t0 - h.t, theta.c, theta.p));

  const std::size_t n = test.events.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Event& ei = test.events[i];
    double lam = mu(ei.x, ei.y);
    for (const Event& h : history.events)
      lam += triggering_phi(ei.t - h.t, ei.x - h.x, ei.y - h.y, h.m, theta, m0);
    for (std::size_t j = 0; j < i; ++j) {
      const Event& ej = test.events[j];
      lam += triggering_phi(ei.t - ej.t, ei.x - ej.x, ei.y - ej.y, ej.m, theta,
                            m0);
    }
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw NumericalError("test likelihood: non-positive intensity");
    ll += std::log(lam);
    ll -= integrated_triggering(ei.t, ei.m, t1, theta, m0);
  }
  if (!std::isfinite(ll))
    throw NumericalError("test likelihood: non-finite result");
  return ll;
}

double test_log_likelihood_posterior(const std::vector<ModelSample>& samples,
                                     const Catalog& test,
                                     const Catalog& history,
                                     const EvalGrid& grid) {
  if (samples.empty())
    throw ConfigError("posterior test likelihood: empty sample list");
  std::vector<double> lls;
  lls.reserve(samples.size());
  for (const ModelSample& s : samples) {
    if (s.mu_grid.size() != grid.n_cells())
      throw ConfigError(
          "posterior test likelihood: sample grid does not match the "
          "evaluation grid");
    BackgroundField field = make_grid_field(s.mu_grid, grid);
    lls.push_back(
        test_log_likelihood_point(field, s.theta, test, history, grid));
  }
  const double mx = *std::max_element(lls.begin(), lls.end());
  double acc = 0.0;
  for (double v : lls) acc += std::exp(v - mx);
  return mx + std::log(acc / static_cast<double>(lls.size()));
}

double l2_background(const BackgroundField& mu_true,
                     const BackgroundField& mu_hat, const EvalGrid& grid) {
  const auto pts = grid.centers();
  double s = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double d = mu_true(pts(i, 0), pts(i, 1)) - mu_hat(pts(i, 0), pts(i, 1));
    s += d * d;
  }
  return std::sqrt(s * grid.cell_area());
}

double l2_background(const Eigen::VectorXd& mu_true,
                     const Eigen::VectorXd& mu_hat, const EvalGrid& grid) {
  if (mu_true.size() != grid.n_cells() || mu_hat.size() != grid.n_cells())
    throw ConfigError("l2: vector sizes do not match the grid");
  return std::sqrt((mu_true - mu_hat).squaredNorm() * grid.cell_area());
}

}  // namespace gpetas
