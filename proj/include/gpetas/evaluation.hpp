#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpetas/catalog.hpp"
#include "gpetas/triggering.hpp"

namespace gpetas {

// Regular grid of cell centers tiling the spatial window; used for Riemann
// sums and for discretized background fields.  Cell (ix, iy) has center
// (x_min + (ix+0.5)dx, y_min + (iy+0.5)dy) and flat index iy*nx + ix.
struct EvalGrid {
  int nx = 50;
  int ny = 50;
  DomainWindow window;  // only the spatial ranges are used

  EvalGrid() = default;
  EvalGrid(int nx_, int ny_, const DomainWindow& w);

  double cell_area() const {
    return (window.x_range[1] - window.x_range[0]) / nx *
           (window.y_range[1] - window.y_range[0]) / ny;
  }
  int n_cells() const { return nx * ny; }
  // All cell centers, flat order iy*nx + ix.
  Eigen::Matrix<double, Eigen::Dynamic, 2> centers() const;
  // Flat index of the cell containing (x, y), clamped to the window.
  int cell_index(double x, double y) const;
};

// Riemann sum of the field over the grid: sum mu(center) * cell_area.
double grid_integral(const BackgroundField& mu, const EvalGrid& grid);

// Field backed by per-cell values (nearest-cell lookup, clamped at edges).
// Throws ConfigError if values.size() != grid.n_cells().
BackgroundField make_grid_field(const Eigen::VectorXd& values,
                                const EvalGrid& grid);

// One posterior (or point) model realization for evaluation: the background
// on the evaluation grid plus triggering parameters.
struct ModelSample {
  Eigen::VectorXd mu_grid;
  TriggeringParams theta;
};

// Log likelihood of the test catalog over its time window given a point
// model.  History events must all precede the test window; they contribute
// triggering terms (sums and residual integrals) but no event terms.  The
// spatial integral of mu uses the grid Riemann sum; the triggering integral
// is closed-form over the plane.
double test_log_likelihood_point(const BackgroundField& mu,
                                 const TriggeringParams& theta,
                                 const Catalog& test, const Catalog& history,
                                 const EvalGrid& grid);

// log (1/K) sum_k exp(l_k) over per-sample point likelihoods, max-shifted.
// Each sample's field is its grid discretization.  Throws ConfigError on an
// empty sample list or a grid-size mismatch.
double test_log_likelihood_posterior(const std::vector<ModelSample>& samples,
                                     const Catalog& test,
                                     const Catalog& history,
                                     const EvalGrid& grid);

// sqrt(sum_cells (mu - mu_hat)^2 * cell_area).
double l2_background(const BackgroundField& mu_true,
                     const BackgroundField& mu_hat, const EvalGrid& grid);
double l2_background(const Eigen::VectorXd& mu_true,
                     const Eigen::VectorXd& mu_hat, const EvalGrid& grid);

}  // namespace gpetas
