#include "support.hpp"

#include "vpkit/dynamics.hpp"
#include "vpkit/initial_data.hpp"
#include "vpkit/moments.hpp"

#include <doctest.h>

#include <array>

using namespace vpkit;
using namespace vpkit::testing;

namespace {

SimulationConfig small_config(double T, double dt, double softening = 0.05) {
  SimulationConfig c;
  c.kernel = {2, 1, softening};
  c.T = T;
  c.dt = dt;
  c.output_interval = 0.05;
  c.grid = GridSpec<double>::cube(2, -2.0, 2.0, 32);
  c.p_grid = {1, 2, 4, 8};
  c.k_set = {0, 1, 2, 3, 4};
  c.seed = 3;
  return c;
}

// Two unit charges in the plane, state (x1, x2, v1, v2); classical RK4.
using State = std::array<Eigen::Vector2d, 4>;

State derivative(const State& s) {
  const Eigen::Vector2d r = s[0] - s[1];
  const Eigen::Vector2d f = r / r.squaredNorm();
  return {s[2], s[3], f, -f};
}

State rk4(State s, double T, int steps) {
  const double h = T / steps;
  auto axpy = [](const State& a, double c, const State& b) {
    State out;
    for (int i = 0; i < 4; ++i) out[i] = a[i] + c * b[i];
    return out;
  };
  for (int n = 0; n < steps; ++n) {
    const State k1 = derivative(s);
    const State k2 = derivative(axpy(s, h / 2, k1));
    const State k3 = derivative(axpy(s, h / 2, k2));
    const State k4 = derivative(axpy(s, h, k3));
    for (int i = 0; i < 4; ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return s;
}

}  // namespace

TEST_CASE("ballistic motion without a field") {
  const auto e = ensemble_from(2, {{0.1, 0.2}}, {{1.5, -0.5}}, {1});
  VerletIntegrator it(e, KernelSpec<double>{2, 1, 0.0});
  for (int i = 0; i < 10; ++i) it.step(0.1);
  CHECK(it.ensemble().positions()(0, 0) == doctest::Approx(1.6));
  CHECK(it.ensemble().positions()(0, 1) == doctest::Approx(-0.3));
  CHECK(it.ensemble().velocities()(0, 0) == 1.5);
  CHECK(it.field_sup() == 0);
}

TEST_CASE("constant external field") {
  const auto e = ensemble_from(2, {{0, 0}}, {{1, 0}}, {1});
  const Eigen::Vector2d E0(0.5, -2);
  const double dt = 0.1;
  const auto next = step(e, dt, KernelSpec<double>{2, 1, 0.0}, Eigen::VectorXd(E0));
  CHECK(next.velocities()(0, 0) == doctest::Approx(1 + dt * E0[0]));
  CHECK(next.velocities()(0, 1) == doctest::Approx(dt * E0[1]));
  CHECK(next.positions()(0, 0) == doctest::Approx(dt + dt * dt * E0[0] / 2));
  CHECK(next.positions()(0, 1) == doctest::Approx(dt * dt * E0[1] / 2));
}

TEST_CASE("two-body repulsion converges at second order") {
  const State start{Eigen::Vector2d(-0.5, 0), Eigen::Vector2d(0.5, 0), Eigen::Vector2d(0, 0.3),
                    Eigen::Vector2d(0, -0.3)};
  const State reference = rk4(start, 1.0, 20000);
  auto error = [&](double dt) {
    VerletIntegrator it(ensemble_from(2, {{-0.5, 0}, {0.5, 0}}, {{0, 0.3}, {0, -0.3}}, {1, 1}),
                        KernelSpec<double>{2, 1, 0.0});
    for (int i = 0; i < int(std::lround(1 / dt)); ++i) it.step(dt);
    const auto& x = it.ensemble().positions();
    return (x.row(0).transpose() - reference[0]).norm() + (x.row(1).transpose() - reference[1]).norm();
  };
  const double coarse = error(0.02), fine = error(0.01);
  CHECK(coarse < 1e-2);
  CHECK(coarse / fine == doctest::Approx(4).epsilon(0.1));
}

TEST_CASE("energy") {
  const KernelSpec<double> k{2, 1, 0.0};
  CHECK(total_energy(ensemble_from(2, {{0, 0}}, {{1, 0}}, {1}), k) == doctest::Approx(0.5));
  // ln 1 = 0, so only the kinetic part remains
  CHECK(total_energy(ensemble_from(2, {{0, 0}, {1, 0}}, {{1, 0}, {0, 0}}, {1, 1}), k) == doctest::Approx(0.5));
  // repulsion: potential energy falls as the pair separates
  const double near = total_energy(ensemble_from(2, {{0, 0}, {0.5, 0}}, {{0, 0}, {0, 0}}, {1, 1}), k);
  const double far = total_energy(ensemble_from(2, {{0, 0}, {2, 0}}, {{0, 0}, {0, 0}}, {1, 1}), k);
  CHECK(near > far);
  const double near3 = total_energy(ensemble_from(3, {{0, 0, 0}, {0.5, 0, 0}}, {{0, 0, 0}, {0, 0, 0}}, {1, 1}),
                                    KernelSpec<double>{3, 1, 0.0});
  CHECK(near3 == doctest::Approx(2));
}

TEST_CASE("energy and momentum are conserved in a small run") {
  const auto initial = sample(make_log_singular(2), 300, 17).ensemble;
  const auto r = run(initial, small_config(0.3, 1e-3, 0.05));
  REQUIRE_FALSE(r.series.failed);
  const auto& rec = r.series.records;
  const double h0 = rec.front().energy;
  for (const auto& x : rec) {
    CHECK(std::abs(x.energy - h0) / std::abs(h0) < 1e-3);
    CHECK((x.momentum - rec.front().momentum).norm() / x.total_mass < 1e-10);
  }
  CHECK(rec.back().time == doctest::Approx(0.3));
  CHECK(rec.size() == 7);
}

TEST_CASE("zero-mass ensemble") {
  const auto e = ensemble_from(2, {{0, 0}, {0.5, 0}}, {{1, 0}, {0, 1}}, {0, 0});
  const auto r = run(e, small_config(0.1, 0.01));
  REQUIRE_FALSE(r.series.failed);
  CHECK(r.final_time == doctest::Approx(0.1));
  for (const auto& x : r.series.records) {
    CHECK(x.energy == 0);
    CHECK(x.total_mass == 0);
    for (const double m : x.moments) CHECK(m == 0);
    for (const double p : x.lp_norms) CHECK(p == 0);
  }
}

TEST_CASE("single particle keeps its moments") {
  const auto e = ensemble_from(2, {{0, 0}}, {{0.7, 0.2}}, {1.3});
  const auto r = run(e, small_config(0.2, 0.01));
  for (const double k : {1.0, 2.0, 4.0}) {
    for (const double m : r.series.moment_track(k)) CHECK(m == doctest::Approx(r.series.moment_track(k)[0]));
  }
  CHECK_THROWS_AS(r.series.moment_track(7.5), std::out_of_range);
}

TEST_CASE("configuration errors") {
  const auto e = sample(make_log_singular(2), 10, 1).ensemble;
  auto c = small_config(0.1, 0.01);
  c.dt = -1;
  CHECK_THROWS_AS(run(e, c), std::invalid_argument);
  c = small_config(0.1, 0.01, 0.0);
  CHECK_THROWS_AS(run(e, c), std::invalid_argument);
  c = small_config(0.1, 0.01);
  c.grid = GridSpec<double>::cube(3, -1.0, 1.0, 4);
  CHECK_THROWS_AS(run(e, c), std::invalid_argument);
}

TEST_CASE("non-finite state stops the run with a partial series") {
  auto e = ensemble_from(2, {{0, 0}, {1, 0}}, {{0, 0}, {0, 0}}, {1, 1});
  auto c = small_config(0.1, 0.01);
  c.external_field = Eigen::Vector2d(std::numeric_limits<double>::infinity(), 0);
  const auto r = run(e, c);
  CHECK(r.series.failed);
  CHECK_FALSE(r.series.failure.empty());
}

TEST_CASE("twin flows") {
  const auto initial = sample(make_log_singular(2), 200, 5).ensemble;
  const auto c = small_config(0.2, 2e-3);
  const auto same = twin_flow(initial, c, c);
  for (const double d : same.distance) CHECK(d == 0);

  auto half = c;
  half.dt = c.dt / 2;
  const auto tw = twin_flow(initial, c, half, 4.0);
  CHECK(tw.distance.front() == 0);
  CHECK(tw.distance.back() > 0);
  CHECK(tw.rho_norm_a.size() == tw.times.size());

  auto odd = c;
  odd.output_interval = 0.03;
  CHECK_THROWS(twin_flow(initial, c, odd));
}

TEST_CASE("perturbation response") {
  const auto initial = sample(make_log_singular(2), 200, 5).ensemble;
  const auto c = small_config(0.2, 2e-3);
  const auto zero = perturbation_response(initial, 0.0, c);
  for (const double r : zero.ratio) CHECK(r == 0);

  // one particle streams freely, so D(t) = mass delta
  const auto lone = ensemble_from(2, {{0.2, 0.1}}, {{1, -0.5}}, {2.0});
  const auto free = perturbation_response(lone, 1e-6, c);
  for (const double r : free.ratio) CHECK(r == doctest::Approx(2.0).epsilon(1e-8));

  const auto resp = perturbation_response(initial, 1e-6, c);
  CHECK(resp.continuous);
  for (const double r : resp.ratio) CHECK(std::isfinite(r));
}
