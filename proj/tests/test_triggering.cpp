#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpetas/evaluation.hpp"
#include "gpetas/triggering.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gpetas;
using namespace gpetas::test;

namespace {

// Pinned high-precision scalars (30-digit arithmetic, rounded to double).
constexpr double kProd2 = 0.52867388003920985;    // 0.018 * exp(3.38)
constexpr double kOmori0 = 463.680144933676965;   // 0.006^{-1.2}
constexpr double kInvPi = 0.318309886183790672;   // 1/pi

}  // namespace

TEST_CASE("parameter validation") {
  TriggeringParams th = case1_theta();
  th.validate();
  th.q = 1.0;
  CHECK_THROWS_AS(th.validate(), ConfigError);
  th = case1_theta();
  th.c = 0.0;
  CHECK_THROWS_AS(th.validate(), ConfigError);
  th = case1_theta();
  th.K0 = -0.1;
  CHECK_THROWS_AS(th.validate(), ConfigError);
}

TEST_CASE("productivity") {
  TriggeringParams th = case1_theta();
  CHECK(productivity(3.36, th, 3.36) == doctest::Approx(0.018).epsilon(1e-15));

  TriggeringParams unit;
  unit.K0 = 1.0;
  unit.alpha = std::log(2.0);
  CHECK(productivity(1.0, unit, 0.0) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(productivity(5.36, th, 3.36) ==
        doctest::Approx(kProd2).epsilon(1e-15));
  CHECK(productivity(4.0, th, 3.36) > productivity(3.8, th, 3.36));
  CHECK_THROWS_AS(productivity(3.0, th, 3.36), Error);
}

TEST_CASE("omori kernel") {
  TriggeringParams th;
  th.c = 1.0;
  th.p = 1.2;
  CHECK(omori(0.0, th) == doctest::Approx(1.0).epsilon(1e-15));

  th.c = 0.006;
  CHECK(omori(0.0, th) == doctest::Approx(kOmori0).epsilon(1e-15));
  CHECK(omori(1.0, th) < omori(0.5, th));
  CHECK(omori(1e9, th) < 1e-10);
  CHECK_THROWS_AS(omori(-0.1, th), Error);
}

TEST_CASE("spatial kernel at the origin") {
  TriggeringParams th;
  th.d = 1.0;
  th.gamma = 0.3;
  th.q = 2.0;
  CHECK(spatial_kernel(0.0, 0.0, 0.0, th, 0.0) ==
        doctest::Approx(kInvPi).epsilon(1e-15));
}

TEST_CASE("spatial kernel isotropy") {
  TriggeringParams th = case1_theta();
  CHECK(spatial_kernel(0.3, 0.7, 4.0, th, 3.36) ==
        doctest::Approx(spatial_kernel(0.7, 0.3, 4.0, th, 3.36))
            .epsilon(1e-15));
  CHECK(spatial_kernel(-0.3, 0.7, 4.0, th, 3.36) ==
        doctest::Approx(spatial_kernel(0.3, 0.7, 4.0, th, 3.36))
            .epsilon(1e-15));
}

TEST_CASE("spatial kernel normalizes to 1 over the plane") {
  TriggeringParams th = case1_theta();
  const double m = 4.36;  // m0 + 1
  const double sig = sigma_m(m, th, 3.36);
  const double scale = std::sqrt(sig);
  const double r_max = scale * std::pow(10.0, 8.0 / (2.0 * (th.q - 1.0)));
  const double integral = integrate_radial_dyadic(
      [&](double r) { return spatial_kernel(r, 0.0, m, th, 3.36); }, scale,
      r_max);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("non-normalizable exponent rejected") {
  TriggeringParams th = case1_theta();
  th.q = 0.9;
  CHECK_THROWS_AS(spatial_kernel(0.0, 0.0, 4.0, th, 3.36), ConfigError);
}

TEST_CASE("conditional intensity composes the three kernels") {
  DomainWindow w = case1_window(100.0);
  TriggeringParams th = case1_theta();
  BackgroundField mu = make_piecewise_field(case1_cells());

  Catalog cat = make_catalog(w, {Event{10.0, 2.0, 3.0, 4.5}});
  // Empty history: before the first event the intensity is mu alone.
  CHECK(conditional_intensity(5.0, 1.0, 2.0, cat, mu, th) ==
        doctest::Approx(mu(1.0, 2.0)).epsilon(1e-15));

  // One prior event: mu plus the product of the three factors.
  const double t = 12.0, x = 2.1, y = 3.2;
  const double expected =
      mu(x, y) + productivity(4.5, th, w.m0) * omori(t - 10.0, th) *
                     spatial_kernel(x - 2.0, y - 3.0, 4.5, th, w.m0);
  CHECK(conditional_intensity(t, x, y, cat, mu, th) ==
        doctest::Approx(expected).epsilon(1e-14));

  // Additivity over history.
  Catalog two = make_catalog(
      w, {Event{10.0, 2.0, 3.0, 4.5}, Event{11.0, 2.5, 3.5, 3.8}});
  const double lam2 = conditional_intensity(t, x, y, two, mu, th);
  const double only_second =
      productivity(3.8, th, w.m0) * omori(t - 11.0, th) *
      spatial_kernel(x - 2.5, y - 3.5, 3.8, th, w.m0);
  CHECK(lam2 == doctest::Approx(conditional_intensity(t, x, y, cat, mu, th) +
                                only_second)
                    .epsilon(1e-14));

  // Events at t_i >= t do not contribute.
  CHECK(conditional_intensity(10.0, x, y, cat, mu, th) ==
        doctest::Approx(mu(x, y)).epsilon(1e-15));
}

TEST_CASE("branching probabilities") {
  DomainWindow w = case1_window(100.0);
  TriggeringParams th = case1_theta();
  BackgroundField mu = make_piecewise_field(case1_cells());
  Catalog cat = make_catalog(w, {Event{1.0, 2.0, 3.0, 5.5},
                                 Event{1.01, 2.001, 3.001, 3.5},
                                 Event{90.0, 0.5, 4.5, 3.4}});

  auto p0 = branching_probabilities(0, cat, mu, th);
  REQUIRE(p0.size() == 1);
  CHECK(p0[0] == doctest::Approx(1.0).epsilon(1e-15));

  auto p1 = branching_probabilities(1, cat, mu, th);
  REQUIRE(p1.size() == 2);
  CHECK(p1[0] + p1[1] == doctest::Approx(1.0).epsilon(1e-12));
  // Immediately after a large nearby parent, triggering dominates.
  CHECK(p1[1] > 0.9);

  // A late event far from everything is background with high probability.
  auto p2 = branching_probabilities(2, cat, mu, th);
  REQUIRE(p2.size() == 3);
  CHECK(p2[0] > 0.99);
  CHECK(p2[0] + p2[1] + p2[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("branching probabilities normalize over random catalogs") {
  RngStream rng(314);
  TriggeringParams th = case1_theta();
  DomainWindow w = case1_window(200.0);
  BackgroundField mu = make_constant_field(0.002);
  for (int rep = 0; rep < 100; ++rep) {
    Catalog cat;
    cat.window = w;
    const int n = 2 + static_cast<int>(rng.uniform(0.0, 8.0));
    for (int i = 0; i < n; ++i)
      cat.events.push_back(Event{rng.uniform(0.0, 200.0),
                                 rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0),
                                 3.36 + rng.exponential(2.0)});
    cat.sort_by_time();
    const std::size_t i = cat.size() - 1;
    auto p = branching_probabilities(i, cat, mu, th);
    REQUIRE(p.size() == i + 1);
    double s = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("integrated triggering") {
  TriggeringParams th;
  th.K0 = 1.0;
  th.alpha = 1.0;
  th.c = 1.0;
  th.p = 2.0;

  CHECK(integrated_triggering(5.0, 1.0, 5.0, th, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-15));
  // p=2, c=1, kappa=e over one day: e * (1 - 1/2).
  CHECK(integrated_triggering(0.0, 1.0, 1.0, th, 0.0) ==
        doctest::Approx(std::exp(1.0) * 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(integrated_triggering(5.0, 1.0, 4.0, th, 0.0), Error);
}

TEST_CASE("integrated triggering matches quadrature") {
  TriggeringParams th = case1_theta();
  const double m = 4.2, m0 = 3.36, dt = 37.5;
  const double closed = integrated_triggering(0.0, m, dt, th, m0);
  const double kappa = th.K0 * std::exp(th.alpha * (m - m0));
  const double quad = integrate_1d(
      [&](double s) { return kappa * std::pow(s + th.c, -th.p); }, 0.0, dt,
      1e-14);
  CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("integrated triggering p=1 logarithmic branch") {
  TriggeringParams th;
  th.K0 = 1.0;
  th.alpha = 0.5;
  th.c = 0.5;
  th.p = 1.0;
  const double closed = integrated_triggering(0.0, 0.0, 3.0, th, 0.0);
  CHECK(closed == doctest::Approx(std::log(3.5) - std::log(0.5))
                      .epsilon(1e-13));
  // Continuity across the switch.
  th.p = 1.0 + 5e-11;
  CHECK(integrated_triggering(0.0, 0.0, 3.0, th, 0.0) ==
        doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("piecewise field semantics") {
  auto cells = case1_cells();
  BackgroundField mu = make_piecewise_field(cells);
  CHECK(mu(1.0, 3.0) == doctest::Approx(0.005));
  CHECK(mu(4.0, 3.0) == doctest::Approx(0.001));
  CHECK(mu(2.5, 0.5) == doctest::Approx(0.0005));
  CHECK(mu(7.0, 7.0) == doctest::Approx(0.0));
  CHECK(piecewise_integral(cells) == doctest::Approx(kCase1MuIntegral));
}

TEST_CASE("log likelihood reduces to the Poisson void probability") {
  DomainWindow w = case1_window(50.0);
  const double mu0 = 0.003;
  BackgroundField mu = make_constant_field(mu0);
  TriggeringParams th = case1_theta();
  Catalog empty;
  empty.window = w;
  const double mu_integral = mu0 * w.area();
  CHECK(log_likelihood(empty, mu, th, mu_integral) ==
        doctest::Approx(-50.0 * 25.0 * mu0).epsilon(1e-14));

  // Single event with triggering disabled: Poisson reduction.
  TriggeringParams no_trig = th;
  no_trig.K0 = 0.0;
  Catalog one = make_catalog(w, {Event{10.0, 2.0, 3.0, 4.0}});
  CHECK(log_likelihood(one, mu, no_trig, mu_integral) ==
        doctest::Approx(std::log(mu0) - 50.0 * 25.0 * mu0).epsilon(1e-13));
}

TEST_CASE("log likelihood matches a brute-force oracle") {
  // Independent evaluation: raw formulas for each factor, a 400x400 Riemann
  // sum for the background integral, and time quadrature for the triggering
  // residuals.
  DomainWindow w = case1_window(100.0);
  TriggeringParams th = case1_theta();
  BackgroundField mu = make_piecewise_field(case1_cells());
  Catalog cat = make_catalog(w, {Event{10.0, 2.0, 3.0, 4.5},
                                 Event{10.4, 2.05, 3.02, 3.6},
                                 Event{60.0, 4.2, 0.8, 3.9}});

  auto phi_raw = [&](double dt, double dx, double dy, double mp) {
    const double kappa = th.K0 * std::exp(th.alpha * (mp - w.m0));
    const double g = std::pow(dt + th.c, -th.p);
    const double sig =
        th.d * th.d * std::pow(10.0, 2.0 * th.gamma * (mp - w.m0));
    const double r2 = dx * dx + dy * dy;
    const double s =
        (th.q - 1.0) / (M_PI * sig) * std::pow(1.0 + r2 / sig, -th.q);
    return kappa * g * s;
  };

  double oracle = 0.0;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    double lam = mu(cat.events[i].x, cat.events[i].y);
    for (std::size_t j = 0; j < i; ++j)
      lam += phi_raw(cat.events[i].t - cat.events[j].t,
                     cat.events[i].x - cat.events[j].x,
                     cat.events[i].y - cat.events[j].y, cat.events[j].m);
    oracle += std::log(lam);
  }
  const int nx = 400, ny = 400;
  const double dxc = 5.0 / nx, dyc = 5.0 / ny;
  double mu_int = 0.0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      mu_int += mu((ix + 0.5) * dxc, (iy + 0.5) * dyc) * dxc * dyc;
  oracle -= w.duration() * mu_int;
  for (const auto& e : cat.events) {
    const double kappa = th.K0 * std::exp(th.alpha * (e.m - w.m0));
    oracle -= integrate_1d(
        [&](double s) { return kappa * std::pow(s + th.c, -th.p); }, 0.0,
        w.t_range[1] - e.t, 1e-13);
  }

  const double lib = log_likelihood(cat, mu, th, piecewise_integral(case1_cells()));
  CHECK(lib == doctest::Approx(oracle).epsilon(1e-4));
  // With the same integral inputs the agreement is much tighter.
  const double lib_grid = log_likelihood(cat, mu, th, mu_int);
  CHECK(lib_grid == doctest::Approx(oracle).epsilon(1e-8));
}
