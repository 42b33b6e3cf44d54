#include "support.hpp"

#include "vpkit/density.hpp"
#include "vpkit/initial_data.hpp"
#include "vpkit/moments.hpp"

#include <doctest.h>

#include <random>

using namespace vpkit;
using namespace vpkit::testing;

TEST_CASE("deposit single particle") {
  const auto grid = GridSpec<double>::cube(2, 0.0, 3.0, 3);
  const auto e = ensemble_from(2, {{1.5, 1.5}}, {{0, 0}}, {1});
  const auto est = estimate_density(e, grid);
  CHECK(est.density.values[4] == 1);
  CHECK(est.density.values.sum() == 1);
  CHECK(est.mass_outside == 0);
}

TEST_CASE("deposit conserves in-box mass") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<std::vector<double>> x, v;
  std::vector<double> w;
  double inside = 0;
  for (int i = 0; i < 500; ++i) {
    x.push_back({u(rng), u(rng)});
    v.push_back({0, 0});
    w.push_back(0.5 + 0.001 * i);
    if (std::abs(x.back()[0]) <= 1 && std::abs(x.back()[1]) <= 1) inside += w.back();
  }
  const auto e = ensemble_from(2, x, v, w);
  const auto est = estimate_density(e, GridSpec<double>::cube(2, -1.0, 1.0, 17));
  CHECK(est.density.integral() == doctest::Approx(inside).epsilon(1e-13));
  CHECK(est.density.integral() + est.mass_outside == doctest::Approx(e.total_mass()).epsilon(1e-13));
}

TEST_CASE("grid locate and centers") {
  const auto g = GridSpec<double>::cube(3, -1.0, 1.0, 4);
  CHECK(g.cell_count() == 64);
  const Eigen::Vector3d x(0.1, -0.9, 0.6);
  const auto c = g.locate(x);
  REQUIRE(c >= 0);
  CHECK((g.cell_center(c) - x).cwiseAbs().maxCoeff() <= 0.5 * g.h);
  CHECK(g.locate(Eigen::Vector3d(1.5, 0, 0)) == -1);
  CHECK(g.locate(Eigen::Vector3d(1.0, 1.0, 1.0)) == 63);
  CHECK_THROWS(GridSpec<double>::cube(2, 1.0, 1.0, 4));
}

TEST_CASE("lp norm of a unit box indicator") {
  const auto g = GridSpec<double>::cube(2, 0.0, 1.0, 8);
  const auto one = DensityField<double>::sampled(g, [](const Eigen::VectorXd&) { return 1.0; });
  for (const double p : {1.0, 2.0, 7.5, 64.0}) CHECK(lp_norm(one, p) == doctest::Approx(1));
  CHECK(lp_norm(one, std::numeric_limits<double>::infinity()) == 1);
  CHECK_THROWS(lp_norm(one, 0.5));
}

TEST_CASE("lp norm homogeneity") {
  const auto g = GridSpec<double>::cube(2, -1.0, 1.0, 32);
  auto f = DensityField<double>::sampled(g, [](const Eigen::VectorXd& x) { return std::exp(-x.squaredNorm()); });
  const double base = lp_norm(f, 3.0);
  f.values *= 2.5;
  CHECK(lp_norm(f, 3.0) == doctest::Approx(2.5 * base).epsilon(1e-14));
  f.values.setZero();
  CHECK(lp_norm(f, 3.0) == 0);
}

TEST_CASE("lp norm of the log-singular density") {
  // cell averages of pi ln_-|x|, so the grid norm converges from below
  const int cells = 600;
  const auto g = GridSpec<double>::cube(2, -1.0, 1.0, cells);
  const auto rho = DensityField<double>::sampled(g, [](const Eigen::VectorXd& x) { return pi * log_minus(x.norm()); });
  const double exact = std::sqrt(pi * pi * pi / 2);
  CHECK(exact == doctest::Approx(log_singular::lp_norm(2, 2.0)));
  CHECK(lp_norm(rho, 2.0) == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("uniqueness functional") {
  const auto g = GridSpec<double>::cube(2, -1.0, 1.0, 400);
  auto disk = DensityField<double>::sampled(g, [](const Eigen::VectorXd& x) { return x.norm() <= 1 ? 1.0 : 0.0; });
  const std::vector<double> p{1, 2, 4, 8};
  auto u = uniqueness_functional(disk, std::span<const double>(p));
  CHECK(u.argmax_p == 1);
  CHECK(u.value == doctest::Approx(pi).epsilon(0.005));
  CHECK(lp_norm(disk, 2.0) / 2 == doctest::Approx(std::sqrt(pi) / 2).epsilon(0.005));
  disk.values *= 2;
  const auto doubled = uniqueness_functional(disk, std::span<const double>(p));
  CHECK(doubled.value == doctest::Approx(2 * u.value));
  CHECK(doubled.argmax_p == u.argmax_p);
  CHECK_THROWS(uniqueness_functional(disk, std::span<const double>()));
}

TEST_CASE("uniqueness functional of the log-singular density against closed forms") {
  const std::vector<double> p{1, 2, 4, 8, 16, 32};
  double closed = 0;
  for (const double q : p) closed = std::max(closed, log_singular::lp_norm(2, q) / q);
  // sup over the dyadic grid is attained at p = 1 (mass pi^2/2)
  CHECK(closed == doctest::Approx(pi * pi / 2));
  for (const int cells : {200, 400}) {
    const auto g = GridSpec<double>::cube(2, -1.0, 1.0, cells);
    const auto rho =
        DensityField<double>::sampled(g, [](const Eigen::VectorXd& x) { return pi * log_minus(x.norm()); });
    CHECK(uniqueness_functional(rho, std::span<const double>(p)).value == doctest::Approx(closed).epsilon(0.01));
  }
}

TEST_CASE("log envelope") {
  const auto g = GridSpec<double>::cube(2, -1.0, 1.0, 64);
  DensityField<double> zero(g);
  CHECK(log_envelope_check(zero, Eigen::Vector2d(0.3, 0.1), 1e-9).holds);
  const auto rho = DensityField<double>::sampled(g, [](const Eigen::VectorXd& x) { return pi * log_minus(x.norm()); });
  CHECK(log_envelope_check(rho, Eigen::Vector2d(0, 0), pi + 1).holds);
  const auto off = log_envelope_check(rho, Eigen::Vector2d(0.5, 0), 1.0);
  CHECK_FALSE(off.holds);
  CHECK(g.cell_center(off.worst_cell).norm() < 0.05);
}

TEST_CASE("pointwise density bound") {
  auto g = GridSpec<double>::cube(2, 0.0, 1.0, 1);
  DensityField<double> m(g);
  CHECK(pointwise_density_bound(1.0, m, 2.0).values[0] == 0);
  m.values[0] = pi;
  // min_R pi R^2 + pi R^-2 = 2 pi at R = 1
  CHECK(pointwise_density_bound(1.0, m, 2.0).values[0] == doctest::Approx(2 * pi));
  CHECK(interpolation_constant(2, 2) == doctest::Approx(2.0));
  CHECK_THROWS(pointwise_density_bound(0.0, m, 2.0));
}

TEST_CASE("sampled density respects the pointwise bound") {
  const auto s = sample(make_log_singular(2), 200000, 11);
  const auto g = GridSpec<double>::cube(2, -1.0, 1.0, 20);
  const auto rho = estimate_density(s.ensemble, g).density;
  const auto mk = estimate_moment_density(s.ensemble, g, 2.0).density;
  const auto bound = pointwise_density_bound(s.ensemble.f_inf_bound(), mk, 2.0);
  const double w = s.ensemble.weights()[0];
  const double area = g.cell_volume();
  for (Eigen::Index c = 0; c < rho.values.size(); ++c) {
    // binomial standard error of the cell value
    const double count = rho.values[c] * area / w;
    const double se = std::sqrt(std::max(count, 1.0)) * w / area;
    CHECK(rho.values[c] <= bound.values[c] + 3 * se);
  }
}
