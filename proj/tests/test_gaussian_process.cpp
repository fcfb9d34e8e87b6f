#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpetas/gaussian_process.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gpetas;
using namespace gpetas::test;

namespace {
constexpr double kExpHalf = 0.606530659712633424;  // exp(-1/2)

Eigen::Matrix<double, Eigen::Dynamic, 2> pts(
    std::initializer_list<std::pair<double, double>> xs) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> m(
      static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [a, b] : xs) {
    m(i, 0) = a;
    m(i, 1) = b;
    ++i;
  }
  return m;
}
}  // namespace

TEST_CASE("covariance function") {
  GpHyperParams nu;
  nu.nu0 = 2.5;
  nu.nu1 = 0.7;
  nu.nu2 = 1.3;
  CHECK(covariance(0.3, 0.4, 0.3, 0.4, nu) == doctest::Approx(2.5));
  CHECK(covariance(0.1, 0.9, 0.8, 0.2, nu) ==
        doctest::Approx(covariance(0.8, 0.2, 0.1, 0.9, nu)).epsilon(1e-15));
  CHECK(covariance(0.1, 0.9, 0.8, 0.2, nu) <= 2.5);

  GpHyperParams unit;  // nu0 = nu1 = nu2 = 1
  CHECK(covariance(1.0, 0.0, 0.0, 0.0, unit) ==
        doctest::Approx(kExpHalf).epsilon(1e-15));

  GpHyperParams bad = nu;
  bad.nu1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gram matrix construction") {
  GpHyperParams nu;
  nu.nu0 = 1.7;
  nu.nu1 = 0.4;
  nu.nu2 = 0.9;

  auto one = gram_matrix(pts({{0.2, 0.3}}), nu, 1e-6);
  REQUIRE(one.rows() == 1);
  CHECK(one(0, 0) == doctest::Approx(1.7 * (1.0 + 1e-6)).epsilon(1e-14));

  // Elementwise oracle on 3 points.
  auto p3 = pts({{0.1, 0.2}, {0.8, 0.4}, {0.3, 0.9}});
  auto K = gram_matrix(p3, nu, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double dx = p3(i, 0) - p3(j, 0), dy = p3(i, 1) - p3(j, 1);
      const double want = 1.7 *
                          std::exp(-dx * dx / (2.0 * 0.4 * 0.4)) *
                          std::exp(-dy * dy / (2.0 * 0.9 * 0.9));
      CHECK(K(i, j) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("duplicated point without jitter is singular") {
  GpHyperParams nu;
  auto dup = pts({{0.5, 0.5}, {0.5, 0.5}});
  Eigen::MatrixXd K = gram_matrix(dup, nu, 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  CHECK(llt.info() != Eigen::Success);

  // The escalating factorization copes with the duplicate.
  GramChol chol(dup, nu, kDefaultJitter);
  CHECK(std::isfinite(chol.log_det()));
}

TEST_CASE("gram matrices stay positive semidefinite over random point sets") {
  RngStream rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    GpHyperParams nu;
    nu.nu0 = 0.1 + rng.uniform(0.0, 3.0);
    nu.nu1 = 0.05 + rng.uniform(0.0, 2.0);
    nu.nu2 = 0.05 + rng.uniform(0.0, 2.0);
    const int n = 2 + static_cast<int>(rng.uniform(0.0, 10.0));
    Eigen::Matrix<double, Eigen::Dynamic, 2> p(n, 2);
    for (int i = 0; i < n; ++i) {
      p(i, 0) = rng.uniform(0.0, 5.0);
      p(i, 1) = rng.uniform(0.0, 5.0);
    }
    Eigen::MatrixXd K = gram_matrix(p, nu, kDefaultJitter);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * nu.nu0);
  }
}

TEST_CASE("prior draws are deterministic given the seed") {
  GpHyperParams nu;
  auto p = pts({{0.1, 0.1}, {0.5, 0.9}, {0.9, 0.3}});
  RngStream r1(42), r2(42);
  auto f1 = sample_prior(p, nu, r1);
  auto f2 = sample_prior(p, nu, r2);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(f1.values[i] == f2.values[i]);
}

TEST_CASE("prior draw moments match the Gram matrix") {
  GpHyperParams nu;
  nu.nu0 = 1.5;
  nu.nu1 = 0.6;
  nu.nu2 = 0.6;
  auto p = pts({{0.2, 0.2}, {0.6, 0.5}});
  Eigen::MatrixXd K = gram_matrix(p, nu, 0.0);

  const int n = 100000;
  RngStream rng(202);
  std::vector<double> a(n), b(n), ab(n);
  for (int i = 0; i < n; ++i) {
    auto f = sample_prior(p, nu, rng);
    a[i] = f.values[0];
    b[i] = f.values[1];
    ab[i] = f.values[0] * f.values[1];
  }
  // Means within 4 standard errors of zero.
  const double se_mean = std::sqrt(1.5 / n);
  CHECK(std::fabs(mean(a)) < 4.0 * se_mean);
  CHECK(std::fabs(mean(b)) < 4.0 * se_mean);
  // Variances and the cross moment within 4 standard errors.
  const double se_var = K(0, 0) * std::sqrt(2.0 / n);
  CHECK(std::fabs(variance(a) - K(0, 0)) < 4.0 * se_var);
  CHECK(std::fabs(variance(b) - K(1, 1)) < 4.0 * se_var);
  const double se_cov =
      std::sqrt((K(0, 0) * K(1, 1) + K(0, 1) * K(0, 1)) / n);
  CHECK(std::fabs(mean(ab) - K(0, 1)) < 4.0 * se_cov);
}

TEST_CASE("predictive interpolates observed values") {
  GpHyperParams nu;
  nu.nu0 = 2.0;
  GpFunctionValues f;
  f.points = pts({{0.2, 0.3}, {0.7, 0.8}});
  f.values = Eigen::Vector2d(0.9, -0.4);
  auto g = predictive_conditional(f, pts({{0.2, 0.3}}), nu, 1e-10);
  CHECK(g.mean[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(g.cov(0, 0) < 1e-6 * nu.nu0);
}

TEST_CASE("predictive reverts to the prior far away") {
  GpHyperParams nu;
  nu.nu0 = 2.0;
  nu.nu1 = 0.1;
  nu.nu2 = 0.1;
  GpFunctionValues f;
  f.points = pts({{0.2, 0.3}});
  f.values = Eigen::VectorXd::Constant(1, 5.0);
  auto g = predictive_conditional(f, pts({{3.0, 3.0}}), nu, 1e-10);
  CHECK(std::fabs(g.mean[0]) < 1e-8);
  CHECK(g.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("predictive matches the dense-inverse oracle") {
  GpHyperParams nu;
  nu.nu0 = 1.3;
  nu.nu1 = 0.5;
  nu.nu2 = 0.8;
  GpFunctionValues f;
  f.points = pts({{0.1, 0.4}, {0.6, 0.2}});
  f.values = Eigen::Vector2d(0.7, -1.1);
  auto star = pts({{0.45, 0.35}});

  auto g = predictive_conditional(f, star, nu, 0.0);

  Eigen::MatrixXd Kff = gram_matrix(f.points, nu, 0.0);
  Eigen::MatrixXd Kff_inv = Kff.inverse();
  Eigen::RowVector2d ksf;
  for (int j = 0; j < 2; ++j)
    ksf(j) = covariance(star(0, 0), star(0, 1), f.points(j, 0),
                        f.points(j, 1), nu);
  const double mean_o = ksf * Kff_inv * f.values;
  const double var_o = nu.nu0 - ksf * Kff_inv * ksf.transpose();
  CHECK(g.mean[0] == doctest::Approx(mean_o).epsilon(1e-10));
  CHECK(g.cov(0, 0) == doctest::Approx(var_o).epsilon(1e-10));
}

TEST_CASE("predictive covariance is symmetric") {
  GpHyperParams nu;
  GpFunctionValues f;
  f.points = pts({{0.1, 0.1}, {0.9, 0.9}});
  f.values = Eigen::Vector2d(0.3, 0.4);
  auto g = predictive_conditional(f, pts({{0.2, 0.5}, {0.8, 0.1}, {0.4, 0.9}}),
                                  nu, 1e-8);
  CHECK((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty inputs") {
  GpHyperParams nu;
  GpFunctionValues f;
  f.points.resize(0, 2);
  f.values.resize(0);
  CHECK_THROWS_AS(predictive_conditional(f, pts({{0.1, 0.1}}), nu),
                  ConfigError);

  RngStream rng(5);
  Eigen::Matrix<double, Eigen::Dynamic, 2> none(0, 2);
  CHECK(sample_predictive(f, none, nu, rng).size() == 0);
}

TEST_CASE("joint prior draw is consistent with sequential conditioning") {
  GpHyperParams nu;
  nu.nu0 = 1.2;
  nu.nu1 = 0.5;
  nu.nu2 = 0.5;
  auto pa = pts({{0.3, 0.3}});
  auto pb = pts({{0.6, 0.4}});
  const double kab = covariance(0.3, 0.3, 0.6, 0.4, nu);

  const int n = 100000;
  RngStream rng(777);
  std::vector<double> fb(n), fafb(n);
  for (int i = 0; i < n; ++i) {
    auto fa = sample_prior(pa, nu, rng);
    Eigen::VectorXd fb_draw = sample_predictive(fa, pb, nu, rng, 0.0);
    fb[i] = fb_draw[0];
    fafb[i] = fa.values[0] * fb_draw[0];
  }
  // Marginal of the second point: N(0, nu0); cross moment: k(a,b).
  const double se_mean = std::sqrt(nu.nu0 / n);
  CHECK(std::fabs(mean(fb)) < 4.0 * se_mean);
  const double se_var = nu.nu0 * std::sqrt(2.0 / n);
  CHECK(std::fabs(variance(fb) - nu.nu0) < 4.0 * se_var);
  const double se_cov = std::sqrt((nu.nu0 * nu.nu0 + kab * kab) / n);
  CHECK(std::fabs(mean(fafb) - kab) < 4.0 * se_cov);
}
