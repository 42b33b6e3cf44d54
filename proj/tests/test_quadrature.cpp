#include "support.hpp"

#include "vpkit/kernel_difference.hpp"
#include "vpkit/quadrature.hpp"

#include <doctest.h>

#include <sstream>

using namespace vpkit;
using namespace vpkit::testing;

TEST_CASE("adaptive quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0, pi).value == doctest::Approx(2).epsilon(1e-13));
  // integrable endpoint singularity
  CHECK(integrate([](double x) { return -std::log(x); }, 0, 1).value == doctest::Approx(1).epsilon(1e-11));
  CHECK(integrate([](double x) { return x; }, 1, 0).value == doctest::Approx(-0.5));
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0).value == doctest::Approx(1).epsilon(1e-12));
  QuadratureOptions tight;
  tight.max_intervals = 4;
  CHECK_THROWS_AS(integrate([](double x) { return 1 / std::sqrt(std::abs(x - 0.3)); }, 0, 1, tight),
                  QuadratureError);
  CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, 0, 1), QuadratureError);
}

TEST_CASE("gauss legendre nodes integrate polynomials") {
  double x[5], w[5];
  gauss_legendre(5, x, w);
  double s0 = 0, s8 = 0;
  for (int i = 0; i < 5; ++i) {
    s0 += w[i];
    s8 += w[i] * std::pow(x[i], 8);
  }
  CHECK(s0 == doctest::Approx(2));
  CHECK(s8 == doctest::Approx(2.0 / 9));
}

namespace {

DensityField<double> indicator(double lower, double upper, int cells, Eigen::Vector2d center = {0, 0}) {
  return DensityField<double>::sampled(GridSpec<double>::cube(2, lower, upper, cells), [center](const Eigen::VectorXd& z) {
    return (z - center).norm() <= 1 ? 1.0 : 0.0;
  });
}

}  // namespace

TEST_CASE("kernel difference vanishes for equal points") {
  const auto g = indicator(-1, 1, 32);
  const auto r = kernel_difference_integral(Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d(0.2, 0.1), g);
  CHECK(r.integral == 0);
  CHECK(r.field_difference.norm() == 0);
}

TEST_CASE("kernel difference is translation invariant") {
  const auto g = indicator(-1, 1, 16);
  // shift by exactly two cells so the grids coincide
  const Eigen::Vector2d shift(0.25, 0.25);
  const auto moved = indicator(-0.75, 1.25, 16, shift);
  const Eigen::Vector2d x(0.1, 0), y(-0.1, 0);
  const auto a = kernel_difference_integral(x, y, g);
  const auto b = kernel_difference_integral(x + shift, y + shift, moved);
  CHECK(a.integral == doctest::Approx(b.integral).epsilon(1e-6));
  CHECK((a.field_difference - b.field_difference).norm() <= 1e-6);
}

TEST_CASE("kernel difference of the unit disk obeys one Hoelder constant") {
  const auto g = indicator(-1, 1, 64);
  const Eigen::Vector2d x(0.1, 0), y(-0.1, 0);
  const auto r = kernel_difference_integral(x, y, g);
  // inside the disk E = pi x, so the field difference is exact
  CHECK(r.field_difference.norm() == doctest::Approx(0.2 * pi).epsilon(0.01));
  double worst = 0;
  for (const double p : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    const double bound = p * (lp_norm(g, p) + lp_norm(g, 1.0)) * std::pow(0.2, 1 - 2 / p);
    worst = std::max(worst, r.integral / bound);
  }
  CHECK(worst > 0);
  CHECK(worst < 1);
}

TEST_CASE("hoelder ratio table") {
  const auto g = indicator(-1, 1, 64);
  const std::vector<double> p{4, 8, 16, 32}, d{1e-3, 1e-2, 1e-1};
  const auto rows = holder_ratio_scan(g, p, d, KernelSpec<double>{2, 1, 0.0});
  REQUIRE(rows.size() == p.size() * d.size() * default_holder_probes(2).size());
  double worst = 0;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0);
    worst = std::max(worst, r.ratio);
  }
  CHECK(worst < 50);
  // fixed p: the integral behaves like d ln(1/d) for bounded g, so a tenfold
  // smaller d raises the ratio by at most ln(1/d_small) / ln(1/d_large) <= 2
  for (const auto& a : rows) {
    for (const auto& b : rows) {
      if (a.probe_id == b.probe_id && a.p == b.p && b.d * 10 == doctest::Approx(a.d)) {
        CHECK(b.ratio <= std::log(1 / b.d) / std::log(1 / a.d) * a.ratio);
      }
    }
  }
  std::ostringstream csv;
  write_holder_csv(csv, rows);
  CHECK(csv.str().rfind("p,d,probe_id,integral,bound,ratio", 0) == 0);
}
