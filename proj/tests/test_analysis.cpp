#include "support.hpp"

#include "vpkit/analysis.hpp"
#include "vpkit/initial_data.hpp"

#include <doctest.h>

using namespace vpkit;
using namespace vpkit::testing;

TEST_CASE("report pass flag follows the rule") {
  const VerificationReport ok("c", {}, 1, 1, 0.5, 1.0);
  const VerificationReport bad("c", {}, 1, 1, 1.5, 1.0);
  const VerificationReport nan("c", {}, 1, 1, std::nan(""), 1.0);
  const VerificationReport watch("c", {}, 1, 1, 1e9, 0.0, VerificationReport::Rule::monitor_only);
  const VerificationReport watch_nan("c", {}, 1, 1, std::nan(""), 0.0, VerificationReport::Rule::monitor_only);
  CHECK(ok.pass());
  CHECK_FALSE(bad.pass());
  CHECK_FALSE(nan.pass());
  CHECK(watch.pass());
  CHECK_FALSE(watch_nan.pass());
  const auto j = bad.to_json();
  for (const char* key : {"claim", "inputs", "lhs", "rhs", "residual", "tol", "pass"}) CHECK(j.contains(key));
  CHECK(nan.to_json()["residual"].is_string());
}

TEST_CASE("stirling identity") {
  auto a = verify_stirling(2, 1);
  CHECK(a.pass());
  CHECK(a.rhs() == doctest::Approx(pi / 2));
  CHECK(verify_stirling(3, 1).rhs() == doctest::Approx(4 * pi / 9));
  CHECK(verify_stirling(2, 2).rhs() == doctest::Approx(pi / 2));
  for (const int n : {2, 3}) {
    for (int p = 1; p <= 10; ++p) {
      const auto r = verify_stirling(n, p);
      CHECK(r.pass());
      CHECK(r.residual() <= 1e-8);
    }
  }
  CHECK(verify_stirling(2, 2.5).pass());
  CHECK_THROWS(verify_stirling(2, 0.5));
  CHECK_THROWS(verify_stirling(4, 1));
}

TEST_CASE("growth envelope") {
  CHECK(growth_envelope_value(2, 1) == doctest::Approx(pi / 2));
  const std::vector<double> p{1, 2, 4, 8, 16, 32, 64};
  for (const int n : {2, 3}) {
    const auto r = verify_growth_envelope(n, p);
    CHECK(r.pass());
    CHECK(r.lhs() == doctest::Approx(growth_envelope_value(n, 1)));
    CHECK(r.rhs() == doctest::Approx(2 / (n * n * std::exp(1.0))));
  }
  // the value keeps approaching 1/(2e) for n = 2
  CHECK(growth_envelope_value(2, 4096) == doctest::Approx(1 / (2 * std::exp(1.0))).epsilon(0.01));
  // consecutive tail values for n = 2 change by less than 20%
  for (const double q : {8.0, 16.0, 32.0}) {
    CHECK(growth_envelope_value(2, q) / growth_envelope_value(2, 2 * q) < 1.2);
  }
}

TEST_CASE("interpolation inequality from analytic data") {
  const double k = 2;
  const double q = (k + 2) / 2;
  const auto spec = make_log_singular(2);
  const auto r = verify_lp_moment(log_singular::lp_norm(2, q), spec.f_inf_bound, log_singular::moment(2, k), k, 2);
  CHECK(r.pass());
  CHECK(r.lhs() <= r.rhs());
}

TEST_CASE("interpolation inequality from particles") {
  const auto s = sample(make_log_singular(2), 100000, 21);
  const auto grid = GridSpec<double>::cube(2, -1.0, 1.0, 40);
  const auto r = verify_lp_moment(s.ensemble, 2.0, grid);
  CHECK(r.pass());

  // doubling f doubles both sides
  Ensemble twice(2, s.ensemble.positions(), s.ensemble.velocities(), 2 * s.ensemble.weights(),
                 2 * s.ensemble.f_inf_bound());
  const auto r2 = verify_lp_moment(twice, 2.0, grid);
  CHECK(r2.lhs() == doctest::Approx(2 * r.lhs()));
  CHECK(r2.rhs() == doctest::Approx(2 * r.rhs()));

  CHECK_THROWS_AS(verify_lp_moment(s.ensemble, 2.0, GridSpec<double>::cube(2, -0.5, 0.5, 10)), std::domain_error);
}

TEST_CASE("interpolation inequality with zero velocity moment") {
  const auto e = ensemble_from(2, {{0.1, 0.1}, {-0.3, 0.2}}, {{0, 0}, {0, 0}}, {1, 1});
  const auto r = verify_lp_moment(e, 2.0, GridSpec<double>::cube(2, -1.0, 1.0, 4));
  CHECK(r.pass());
  CHECK(r.rhs() == 0);
  CHECK(r.note().find("uninformative") != std::string::npos);
}

TEST_CASE("moment recursion on a static ensemble") {
  const auto e = ensemble_from(2, {{0, 0}}, {{0.6, 0.8}}, {2});
  SimulationConfig c;
  c.kernel = {2, 1, 0.0};
  c.T = 0.1;
  c.dt = 0.01;
  c.output_interval = 0.02;
  c.k_set = {1, 2, 4, 8, 16};
  c.grid = GridSpec<double>::cube(2, -1.0, 1.0, 8);
  const auto r = run(e, c);
  const auto reports = verify_moment_recursion(r.series, e.total_mass());
  REQUIRE(reports.size() == 3);
  for (const auto& x : reports) CHECK(x.pass());
}

TEST_CASE("gronwall fit") {
  std::vector<double> t, zero, quad;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i / 100.0);
    zero.push_back(0);
    quad.push_back(t.back() * t.back());
  }
  const auto z = gronwall_fit(t, zero, 8, 2);
  CHECK(z.C == 0);
  CHECK(gronwall_check(t, zero, 8, 2).pass());

  // D = t^2: F = t^{2a+2} / ((2a+1)(2a+2)) with a = 1 - n/p
  for (const double p : {4.0, 8.0, 64.0}) {
    const double a = 1 - 2 / p;
    const auto F = gronwall_double_integral(t, quad, p, 2);
    for (std::size_t i = 1; i < t.size(); i += 13) {
      const double exact = std::pow(t[i], 2 * a + 2) / ((2 * a + 1) * (2 * a + 2));
      CHECK(F[i] == doctest::Approx(exact).epsilon(1e-10));
    }
    const auto fit = gronwall_fit(t, quad, p, 2);
    const double expected = (2 * a + 1) * (2 * a + 2) * std::pow(t[1], -2 * a) / (p * p);
    CHECK(fit.C == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("moment interpolation on an ensemble") {
  const auto s = sample(make_log_singular(3), 20000, 2);
  CHECK(verify_moment_interpolation(s.ensemble, 16).pass());
  CHECK_THROWS(verify_moment_interpolation(s.ensemble, 0));
}

TEST_CASE("sampled moment against closed form") {
  const auto s = sample(make_log_singular(2), 100000, 12);
  for (const double k : {1.0, 2.0, 4.0}) {
    const auto r = verify_sampled_moment(s.ensemble, s.proposals, k, log_singular::moment(2, k));
    CHECK(r.pass());
  }
  // a wrong target is caught
  CHECK_FALSE(verify_sampled_moment(s.ensemble, s.proposals, 2, 1.05 * log_singular::moment(2, 2)).pass());
}

TEST_CASE("density histogram against the log-singular cell masses") {
  const auto s = sample(make_log_singular(2), 200000, 6);
  const auto grid = GridSpec<double>::cube(2, -1.0, 1.0, 20);
  HistogramComparison table;
  // exact cell masses of pi ln_-|x| by midpoint refinement
  auto cell_mass = [&](Eigen::Index c) {
    const Eigen::VectorXd lo = grid.cell_lower(c);
    const int m = 40;
    double sum = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const Eigen::Vector2d z(lo[0] + (i + 0.5) * grid.h / m, lo[1] + (j + 0.5) * grid.h / m);
        sum += log_singular::density(2, z.norm());
      }
    }
    return sum * grid.cell_volume() / (m * m);
  };
  const auto r = verify_density_histogram(s.ensemble, grid, cell_mass, 0.15, 0.9, 3, 0.95, &table);
  CHECK(r.pass());
  CHECK(table.radius.size() > 50);
}

TEST_CASE("summary table") {
  const std::vector<VerificationReport> rs{VerificationReport("alpha", {}, 1, 1, 0, 1),
                                           VerificationReport("beta", {}, 1, 1, 2, 1)};
  const auto text = summary_table(rs);
  CHECK(text.find("alpha") != std::string::npos);
  CHECK(text.find("NO") != std::string::npos);
}
