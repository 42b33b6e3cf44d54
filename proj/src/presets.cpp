#include "vpkit/presets.hpp"

#include "vpkit/initial_data.hpp"
#include "vpkit/io.hpp"
#include "vpkit/kernel_difference.hpp"
#include "vpkit/moments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <tuple>

namespace vpkit {

namespace fs = std::filesystem;
using nlohmann::json;

bool PresetOutcome::ok() const {
  if (partial) return false;
  return std::all_of(reports.begin(), reports.end(), [](const VerificationReport& r) { return r.pass(); });
}

std::vector<const VerificationReport*> PresetOutcome::find(const std::string& claim) const {
  std::vector<const VerificationReport*> out;
  for (const auto& r : reports) {
    if (r.claim() == claim) out.push_back(&r);
  }
  return out;
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class Context {
 public:
  Context(const ExperimentConfig& cfg, fs::path dir, std::ostream& log)
      : cfg(cfg), dir(std::move(dir)), log(log), provenance{cfg.hash(), {}} {}

  const ExperimentConfig& cfg;
  fs::path dir;
  std::ostream& log;
  Provenance provenance;
  PresetOutcome outcome;

  void add(VerificationReport r) {
    const auto& monitor = cfg.verification.monitor_only;
    const bool demote = !cfg.verification.assert_checks ||
                        std::find(monitor.begin(), monitor.end(), r.claim()) != monitor.end();
    if (demote && r.rule() == VerificationReport::Rule::at_most) {
      r = VerificationReport(r.claim(), r.inputs(), r.lhs(), r.rhs(), r.residual(), r.tol(),
                             VerificationReport::Rule::monitor_only, r.note(), r.details());
    }
    if (std::find(provenance.claims.begin(), provenance.claims.end(), r.claim()) == provenance.claims.end()) {
      provenance.claims.push_back(r.claim());
    }
    log << "  " << (r.rule() == VerificationReport::Rule::monitor_only ? "[monitor] " : (r.pass() ? "[pass] " : "[FAIL] "))
        << r.claim() << " " << r.inputs().dump() << " residual=" << r.residual() << " tol=" << r.tol() << '\n';
    outcome.reports.push_back(std::move(r));
  }

  fs::path file(const std::string& name) {
    const fs::path p = dir / name;
    outcome.files.push_back(p);
    return p;
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows, const std::vector<std::string>& claims) {
    std::ofstream out(file(name));
    write_table_csv(out, header, rows, {provenance.config_hash, claims});
  }

  double tol(const std::string& name) const { return cfg.tolerance(name); }
};

// ---------------------------------------------------------------------------
// shared helpers

int dimension(const ExperimentConfig& cfg) { return cfg.initial_data.n; }

SimulationConfig simulation_config(const ExperimentConfig& cfg) {
  const auto& s = cfg.simulation;
  SimulationConfig sim;
  sim.kernel = {cfg.initial_data.n, s.gamma, s.softening};
  sim.T = s.T;
  sim.dt = s.dt;
  sim.output_interval = s.output_interval;
  sim.k_set = s.k_set;
  sim.p_grid = s.p_grid;
  sim.grid = GridSpec<double>::cube(cfg.initial_data.n, s.grid_lower, s.grid_upper, s.grid_cells);
  sim.seed = cfg.seed;
  return sim;
}

TabulatedProfile phi_profile(const ExperimentConfig& cfg) {
  try {
    return TabulatedProfile(cfg.initial_data.phi_abscissae, cfg.initial_data.phi_values);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "initial_data.phi_values");
  }
}

PhaseFunction ball_indicator(double radius) {
  return [radius](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x.norm() <= radius ? 1.0 : 0.0; };
}

struct BuiltSpec {
  InitialDataSpec spec;
  std::optional<FixedPointResult> fixed_point;
};

BuiltSpec build_spec(const ExperimentConfig& cfg) {
  const auto& d = cfg.initial_data;
  BuiltSpec out;
  switch (family_from_string(d.family)) {
    case Family::log_singular:
      out.spec = make_log_singular(d.n);
      break;
    case Family::phi_family: {
      SpatialFunction potential;
      if (d.potential == "log_singular") {
        const double e = 2.0 / d.n;
        potential = [e](const Eigen::VectorXd& x) { return -std::pow(log_minus(x.norm()), e); };
      } else {
        potential = [](const Eigen::VectorXd& x) { return x.squaredNorm() - 1; };
      }
      out.spec = make_family(phi_profile(cfg), potential, {}, {}, d.n, d.spatial_radius);
      break;
    }
    case Family::maxwell_boltzmann:
      out.spec = make_maxwell_boltzmann(d.maxwell_power, ball_indicator(d.spatial_radius), d.n, d.spatial_radius);
      break;
    case Family::truncated_steady: {
      if (d.n != 2) throw ConfigError("truncated steady states exist only for n = 2", "initial_data.n");
      const auto phi = phi_profile(cfg);
      out.fixed_point = steady_fixed_point(phi, d.mass_target, d.iterations, d.damping, d.radial_nodes);
      out.spec = make_truncated_steady(out.fixed_point->iterates.back(), phi, d.truncation_level, {}, 2);
      break;
    }
  }
  return out;
}

void require_log_singular(const ExperimentConfig& cfg) {
  if (cfg.initial_data.family != "log_singular") {
    throw ConfigError("preset '" + cfg.experiment + "' compares against the log-singular closed forms",
                      "initial_data.family");
  }
}

// Exact mass of omega_n ln_-|x| over one grid cell, tensor Gauss-Legendre.
double log_singular_cell_mass(const GridSpec<double>& grid, Eigen::Index cell) {
  constexpr int m = 6;
  static const auto rule = [] {
    std::pair<std::array<double, m>, std::array<double, m>> r;
    gauss_legendre(m, r.first.data(), r.second.data());
    return r;
  }();
  const int n = grid.n;
  const Eigen::VectorXd lo = grid.cell_lower(cell);
  const double half = 0.5 * grid.h;
  const int count = n == 2 ? m * m : m * m * m;
  double sum = 0;
  Eigen::VectorXd z(n);
  for (int idx = 0; idx < count; ++idx) {
    int rem = idx;
    double w = 1;
    for (int d = 0; d < n; ++d) {
      const int k = rem % m;
      rem /= m;
      z[d] = lo[d] + half * (1 + rule.first[k]);
      w *= rule.second[k];
    }
    sum += w * log_singular::density(n, z.norm());
  }
  return sum * std::pow(half, n);
}

double max_abs_coordinate(const Ensemble& e) {
  return e.size() == 0 ? 0.0 : e.positions().cwiseAbs().maxCoeff();
}

std::map<double, double> moment_map(const Ensemble& e, const std::vector<double>& ks) {
  std::map<double, double> m;
  for (const double k : ks) {
    if (k >= 1) m[k] = velocity_moment(e, k);
  }
  return m;
}

VerificationReport relative_stability(const std::string& claim, const json& inputs, double a, double b, double tol) {
  const double residual = std::abs(a / b - 1);
  return VerificationReport(claim, inputs, a, b, std::isfinite(residual) ? residual : 1e300, tol,
                            VerificationReport::Rule::at_most, "residual = |lhs/rhs - 1|");
}

// ---------------------------------------------------------------------------
// presets

void preset_stirling(Context& ctx) {
  const auto& a = ctx.cfg.analysis;
  std::vector<std::vector<double>> rows;
  for (const int n : a.stirling_n) {
    for (const double p : a.stirling_p) {
      auto r = verify_stirling(n, p, ctx.tol("stirling"));
      rows.push_back({double(n), p, r.lhs(), r.rhs(), r.residual()});
      ctx.add(std::move(r));
    }
  }
  ctx.csv("stirling.csv", {"n", "p", "quadrature", "closed_form", "relative_error"}, rows, {"stirling_identity"});
  std::vector<std::vector<double>> env;
  for (const int n : a.stirling_n) {
    auto r = verify_growth_envelope(n, a.envelope_p);
    const auto& values = r.details().at("values");
    auto p = a.envelope_p;
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) env.push_back({double(n), p[i], values[i].get<double>()});
    ctx.add(std::move(r));
  }
  ctx.csv("growth_envelope.csv", {"n", "p", "value"}, env, {"log_growth_envelope"});
}

void preset_holder_scan(Context& ctx) {
  const auto& a = ctx.cfg.analysis;
  const int n = dimension(ctx.cfg);
  const auto grid = GridSpec<double>::cube(n, -1.0, 1.0, a.holder_cells);
  const double omega = GeometricConstants::for_dimension(n).omega_n;
  const std::vector<std::pair<std::string, DensityField<double>>> densities{
      {"indicator", DensityField<double>::sampled(grid, [](const Eigen::VectorXd& x) { return x.norm() <= 1 ? 1.0 : 0.0; })},
      {"log", DensityField<double>::sampled(grid, [omega](const Eigen::VectorXd& x) { return omega * log_minus(x.norm()); })},
  };
  auto p = a.holder_p;
  auto d = a.holder_d;
  std::sort(p.begin(), p.end());
  std::sort(d.begin(), d.end());
  const KernelSpec<double> kernel{n, 1, 0.0};
  for (const auto& [name, g] : densities) {
    Stopwatch sw;
    const auto rows = holder_ratio_scan(g, p, d, kernel);
    {
      std::ofstream out(ctx.file("holder_" + name + ".csv"));
      out << "# config_hash=" << ctx.provenance.config_hash << " claims=holder_ratio_bound;holder_ratio_tail\n";
      write_holder_csv(out, rows);
    }
    std::map<std::tuple<std::string, double, double>, double> ratio;
    double worst = 0;
    for (const auto& r : rows) {
      ratio[{r.probe_id, r.p, r.d}] = r.ratio;
      worst = std::max(worst, r.ratio);
    }
    // growth over the last step toward small d and toward large p
    double growth = 0;
    for (const auto& probe : default_holder_probes(n)) {
      for (const double q : p) {
        if (d.size() > 1) growth = std::max(growth, ratio[{probe.id, q, d[0]}] / ratio[{probe.id, q, d[1]}]);
      }
      for (const double s : d) {
        if (p.size() > 1) {
          growth = std::max(growth, ratio[{probe.id, p.back(), s}] / ratio[{probe.id, p[p.size() - 2], s}]);
        }
      }
    }
    ctx.log << "  holder scan (" << name << ") " << rows.size() << " rows in " << sw.seconds() << " s\n";
    ctx.add(VerificationReport("holder_ratio_bound", {{"density", name}, {"cells", a.holder_cells}}, worst,
                               ctx.tol("holder_ceiling"), worst, ctx.tol("holder_ceiling"),
                               VerificationReport::Rule::at_most, "lhs = max ratio over the (p, d, probe) grid"));
    ctx.add(VerificationReport("holder_ratio_tail", {{"density", name}}, growth, 1.0, growth - 1, ctx.tol("holder_growth"),
                               VerificationReport::Rule::at_most,
                               "lhs = largest ratio growth over the final step toward small d or large p"));
  }
}

void preset_thm3_static(Context& ctx) {
  require_log_singular(ctx.cfg);
  const auto& cfg = ctx.cfg;
  const int n = dimension(cfg);
  const auto spec = make_log_singular(n);
  Stopwatch sw;
  const auto first = sample(spec, cfg.initial_data.particles, cfg.seed);
  ctx.log << "  sampled " << first.ensemble.size() << " particles in " << sw.seconds() << " s\n";
  const auto& e = first.ensemble;

  // density against the cell averages of omega_n ln_-|x|
  const auto grid = GridSpec<double>::cube(n, -1.0, 1.0, cfg.analysis.density_cells);
  HistogramComparison table;
  ctx.add(verify_density_histogram(
      e, grid, [&](Eigen::Index c) { return log_singular_cell_mass(grid, c); }, 0.05, 0.9, ctx.tol("density_sigma"),
      ctx.tol("density_fraction"), &table));
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < table.radius.size(); ++i) {
      rows.push_back({table.radius[i], table.observed[i], table.expected[i], table.standard_error[i]});
    }
    ctx.csv("density_cells.csv", {"r", "observed", "expected", "standard_error"}, rows, {"density_histogram"});
  }

  // moments
  std::vector<std::vector<double>> rows;
  for (const double k : cfg.analysis.moment_k) {
    auto r = verify_sampled_moment(e, first.proposals, k, log_singular::moment(n, k), ctx.tol("moment_sigma"));
    rows.push_back({k, r.lhs(), r.rhs(), r.details().at("standard_error").get<double>()});
    ctx.add(std::move(r));
  }
  ctx.csv("moments.csv", {"k", "sampled", "exact", "standard_error"}, rows, {"sampled_moment"});

  // C0 under N doubling
  const double c0 = moment_growth_check(moment_map(e, cfg.analysis.moment_k), n);
  const auto doubled = sample(spec, 2 * cfg.initial_data.particles, cfg.seed + 1);
  const double c0_doubled = moment_growth_check(moment_map(doubled.ensemble, cfg.analysis.moment_k), n);
  std::map<double, double> exact;
  for (const double k : cfg.analysis.moment_k) exact[k] = log_singular::moment(n, k);
  ctx.add(relative_stability("c0_stability",
                             {{"particles", e.size()}, {"doubled", doubled.ensemble.size()}, {"c0_exact",
                                                                                            moment_growth_check(exact, n)}},
                             c0, c0_doubled, ctx.tol("c0_stability")));

  // interpolation bound: closed form and histogram
  const double k = 2;
  const double q = (k + n) / n;
  ctx.add(verify_lp_moment(log_singular::lp_norm(n, q), spec.f_inf_bound, log_singular::moment(n, k), k, n));
  ctx.add(verify_lp_moment(e, k, grid, ctx.tol("lp_moment")));
  ctx.add(verify_moment_interpolation(e, 16, ctx.tol("interpolation")));

  // log envelope with xi = 0 and C = omega_n + 1
  const auto est = estimate_density(e, grid);
  const double omega = GeometricConstants::for_dimension(n).omega_n;
  const auto env = log_envelope_check(est.density, Eigen::VectorXd::Zero(n), omega + 1);
  ctx.add(VerificationReport("log_envelope", {{"C", omega + 1}, {"xi", std::vector<double>(n, 0.0)}},
                             env.worst_margin, 0.0, -env.worst_margin, 0.0, VerificationReport::Rule::at_most,
                             "lhs = min over cells of C (1 + ln_-|x - xi|) - rho"));

  // uniqueness functional: histogram against the dyadic closed form
  const auto& p_grid = cfg.simulation.p_grid;
  const auto u = uniqueness_functional(est.density, std::span<const double>(p_grid));
  double closed = 0;
  for (const double p : p_grid) closed = std::max(closed, log_singular::lp_norm(n, p) / p);
  ctx.add(VerificationReport("uniqueness_functional", {{"h", grid.h}, {"p_grid", p_grid}}, u.value, closed,
                             std::abs(u.value / closed - 1), 0.0, VerificationReport::Rule::monitor_only,
                             "histogram value against the closed form over the same p grid",
                             {{"argmax_p", u.argmax_p}}));
}

void preset_thm3_run(Context& ctx, const std::optional<fs::path>& resume) {
  const auto& cfg = ctx.cfg;
  const int n = dimension(cfg);
  const auto sim = simulation_config(cfg);
  Ensemble initial;
  double start = 0;
  if (resume) {
    auto file = read_ensemble(*resume);
    initial = std::move(file.ensemble);
    start = file.header.value("time", 0.0);
    ctx.log << "  resuming from " << resume->string() << " at t = " << start << '\n';
  } else {
    const auto built = build_spec(cfg);
    initial = sample(built.spec, cfg.initial_data.particles, cfg.seed).ensemble;
  }
  if (initial.dimension() != n) throw ConfigError("checkpoint dimension differs from the configuration", "initial_data.n");
  Stopwatch sw;
  const auto result = run(initial, sim, start);
  ctx.log << "  ran " << initial.size() << " particles to t = " << result.final_time << " in " << sw.seconds()
          << " s\n";
  const auto& series = result.series;
  if (series.failed) {
    ctx.outcome.partial = true;
    ctx.outcome.failure = series.failure;
  }

  const json meta = {{"particles", initial.size()}, {"dt", sim.dt}, {"softening", sim.kernel.softening},
                     {"gamma", sim.kernel.gamma}};
  const auto& rec = series.records;
  double drift = 0, momentum = 0;
  const double h0 = rec.front().energy;
  for (const auto& r : rec) {
    drift = std::max(drift, std::abs(r.energy - h0) / std::abs(h0));
    momentum = std::max(momentum, (r.momentum - rec.front().momentum).norm() / r.total_mass);
  }
  ctx.add(VerificationReport("energy_conservation", meta, rec.back().energy, h0, drift, ctx.tol("energy_drift"),
                             VerificationReport::Rule::at_most, "residual = max_t |H(t) - H(0)| / |H(0)|"));
  ctx.add(VerificationReport("momentum_conservation", meta, momentum, 0.0, momentum, ctx.tol("momentum"),
                             VerificationReport::Rule::at_most, "residual = max_t |P(t) - P(0)| / mass"));
  MomentRecursionOptions mo;
  mo.interpolation_tol = ctx.tol("interpolation");
  mo.growth_margin = ctx.tol("growth_margin");
  for (auto& r : verify_moment_recursion(series, initial.total_mass(), mo)) ctx.add(std::move(r));

  bool finite = true;
  double largest = 0;
  for (const auto& r : rec) {
    finite = finite && std::isfinite(r.uniqueness);
    largest = std::max(largest, r.uniqueness);
  }
  ctx.add(VerificationReport(
      "uniqueness_monitoring",
      {{"records", rec.size()}, {"h", sim.grid.h}, {"cells_per_axis", sim.grid.cells_per_axis},
       {"origin", std::vector<double>(sim.grid.origin.data(), sim.grid.origin.data() + n)}, {"p_grid", sim.p_grid}},
      largest, 0.0, finite ? 0.0 : std::numeric_limits<double>::infinity(), 0.0,
      VerificationReport::Rule::monitor_only,
      "lhs = max over records of the dyadic lower bound for sup_p ||rho||_p / p; grid-dependent"));

  // Interpolation bound at both ends on a grid covering the particles. The
  // histogram of a coarse-grained f obeys the same bound, so the grid is
  // sized for about 16 particles per cell to keep sampling noise out of
  // the left side.
  const int cells = std::clamp(int(std::pow(double(initial.size()) / 16, 1.0 / n)), 2, 32);
  for (const Ensemble* state : std::array<const Ensemble*, 2>{&initial, &result.final_state}) {
    const double half = 1.001 * std::max(1.0, max_abs_coordinate(*state));
    const auto coarse = GridSpec<double>::cube(n, -half, half, cells);
    ctx.add(verify_lp_moment(*state, 2.0, coarse, ctx.tol("lp_moment")));
  }

  {
    std::ofstream out(ctx.file("diagnostics.csv"));
    write_series_csv(out, series, ctx.provenance);
  }
  write_text(ctx.file("diagnostics.json"), series_to_json(series, ctx.provenance).dump(1) + "\n");
  write_ensemble(ctx.file("checkpoint.vpens"), result.final_state,
                 {{"time", result.final_time}, {"config_hash", ctx.provenance.config_hash}, {"seed", cfg.seed}});
}

void preset_twin_flow(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = dimension(cfg);
  const auto built = build_spec(cfg);
  const auto initial = sample(built.spec, cfg.initial_data.particles, cfg.seed).ensemble;
  auto base = simulation_config(cfg);
  const double p = cfg.analysis.gronwall_p;
  auto level = [&](int halvings) {
    auto c = base;
    c.dt = base.dt / std::pow(2.0, halvings);
    return c;
  };
  Stopwatch sw;
  const auto coarse = twin_flow(initial, level(0), level(1), p);
  const auto fine = twin_flow(initial, level(1), level(2), p);
  ctx.log << "  twin flows done in " << sw.seconds() << " s\n";
  const double ratio = coarse.distance.back() / fine.distance.back();
  const double low = ctx.tol("twin_ratio_low"), high = ctx.tol("twin_ratio_high");
  // residual is the distance outside [low, high]
  const double outside = std::isfinite(ratio) ? std::max({low - ratio, ratio - high, 0.0}) : 1e300;
  ctx.add(VerificationReport("twin_flow_convergence",
                             {{"dt", base.dt}, {"particles", initial.size()}, {"low", low}, {"high", high}}, ratio, 4.0,
                             outside, 0.0, VerificationReport::Rule::at_most,
                             "lhs = D_T(dt, dt/2) / D_T(dt/2, dt/4); residual = distance outside [low, high]",
                             {{"D_coarse", coarse.distance.back()}, {"D_fine", fine.distance.back()}}));
  auto gc = gronwall_check(coarse.times, coarse.distance, p, n, coarse.rho_norm_a);
  auto gf = gronwall_check(fine.times, fine.distance, p, n, fine.rho_norm_a);
  const double c_coarse = gc.lhs(), c_fine = gf.lhs();
  ctx.add(std::move(gc));
  ctx.add(std::move(gf));
  ctx.add(relative_stability("gronwall_stability", {{"p", p}}, c_coarse, c_fine, ctx.tol("gronwall_stability")));

  const auto fc = gronwall_double_integral(coarse.times, coarse.distance, p, n);
  const auto ff = gronwall_double_integral(fine.times, fine.distance, p, n);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < coarse.times.size(); ++i) {
    rows.push_back({coarse.times[i], coarse.distance[i], fine.distance[i], fc[i], ff[i], coarse.rho_norm_a[i]});
  }
  ctx.csv("twin_flow.csv", {"time", "D_coarse", "D_fine", "F_coarse", "F_fine", "rho_Lp"}, rows,
          {"twin_flow_convergence", "gronwall_consistency"});

  const double delta = cfg.analysis.perturbation_delta;
  const auto resp = perturbation_response(initial, delta, base);
  rows.clear();
  for (std::size_t i = 0; i < resp.times.size(); ++i) rows.push_back({resp.times[i], resp.ratio[i]});
  ctx.csv("perturbation.csv", {"time", "D_over_delta"}, rows, {"perturbation_continuity"});
  const double mass = initial.total_mass();
  ctx.add(VerificationReport("perturbation_continuity", {{"delta", delta}},
                             resp.ratio.empty() ? 0.0 : resp.ratio.back(), 0.0,
                             resp.continuous ? resp.largest_jump / mass : 1e300, 0.1, VerificationReport::Rule::at_most,
                             "lhs = D(T)/delta; residual = largest jump of D between records over the mass"));
}

void preset_moments(Context& ctx) {
  require_log_singular(ctx.cfg);
  const auto& cfg = ctx.cfg;
  std::vector<std::vector<double>> rows;
  for (const int n : {2, 3}) {
    std::map<double, double> exact;
    for (int k = 1; k <= 32; ++k) {
      exact[k] = log_singular::moment(n, k);
      rows.push_back({double(n), double(k), exact[k], std::pow(exact[k], double(n) / k) / k});
    }
    const double c0 = moment_growth_check(exact, n);
    ctx.add(VerificationReport("moment_growth_closed_form", {{"n", n}, {"k_max", 32}}, c0, 0.0,
                               std::isfinite(c0) ? 0.0 : 1e300, 0.0, VerificationReport::Rule::at_most,
                               "lhs = C0 = max_k M_k^{n/k} / k over k = 1..32; pass when finite"));

    // phi condition for the log-singular potential, against its closed form
    const double e = 2.0 / n;
    const auto phi = verify_phi_condition([e](const Eigen::VectorXd& x) { return -std::pow(log_minus(x.norm()), e); },
                                          1.0, 0.0, {1, 2, 4, 8, 16, 32}, n);
    double worst = 0;
    for (std::size_t i = 0; i < phi.p.size(); ++i) {
      const double q = 2 * phi.p[i] / n;
      const double sigma = GeometricConstants::for_dimension(n).sigma_n;
      const double closed = sigma * std::exp(-(q + 1) * std::log(double(n)) + std::lgamma(q + 1));
      worst = std::max(worst, std::abs(phi.integrals[i] / closed - 1));
    }
    ctx.add(VerificationReport("phi_condition", {{"n", n}, {"p", phi.p}}, phi.c0, 0.0, worst, 1e-6,
                               VerificationReport::Rule::at_most,
                               "lhs = fitted C0; residual = worst relative error of the quadrature integrals"));
  }
  ctx.csv("moments_closed_form.csv", {"n", "k", "M_k", "M_k_pow_n_over_k_over_k"}, rows, {"moment_growth_closed_form"});

  const int n = dimension(cfg);
  const auto s = sample(make_log_singular(n), cfg.initial_data.particles, cfg.seed);
  rows.clear();
  for (const double k : cfg.analysis.moment_k) {
    if (k > 8) continue;  // heavier tails make the sample standard error unreliable
    auto r = verify_sampled_moment(s.ensemble, s.proposals, k, log_singular::moment(n, k), ctx.tol("moment_sigma"));
    rows.push_back({k, r.lhs(), r.rhs(), r.details().at("standard_error").get<double>()});
    ctx.add(std::move(r));
  }
  ctx.csv("moments_sampled.csv", {"k", "sampled", "exact", "standard_error"}, rows, {"sampled_moment"});
  ctx.add(verify_moment_interpolation(s.ensemble, 16, ctx.tol("interpolation")));
}

void preset_steady_radial(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.initial_data.family != "truncated_steady") {
    throw ConfigError("preset 'steady-radial' needs family truncated_steady", "initial_data.family");
  }
  Stopwatch sw;
  const auto built = build_spec(cfg);
  const auto& fp = *built.fixed_point;
  ctx.log << "  fixed point: " << fp.residuals.size() << " iterations in " << sw.seconds() << " s\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < fp.residuals.size(); ++i) rows.push_back({double(i + 1), fp.residuals[i]});
  ctx.csv("fixed_point.csv", {"iteration", "residual_L1"}, rows, {"steady_fixed_point"});
  ctx.add(VerificationReport("steady_fixed_point", {{"iterations", fp.residuals.size()}, {"damping", cfg.initial_data.damping}},
                             fp.residuals.back(), 0.0, fp.diverged ? 1e300 : fp.residuals.back(), 0.0,
                             VerificationReport::Rule::monitor_only,
                             "exploratory damped iteration; lhs = final L1 residual", {{"diverged", fp.diverged}}));

  const auto& profile = fp.iterates.back();
  const double mass = profile.mass();
  double far = 0;
  for (const double r : {1.0, 1.25, 1.5, 2.0, 4.0, 10.0, 100.0}) {
    const double exact = mass * std::log(r);
    far = std::max(far, std::abs(radial_potential(profile, r) - exact) / std::max(1.0, std::abs(exact)));
  }
  ctx.add(VerificationReport("radial_potential_far", {{"mass", mass}}, far, 0.0, far, ctx.tol("potential_far"),
                             VerificationReport::Rule::at_most, "max over r >= 1 of |U(r) - mass ln r|"));
  const double jump = std::abs(radial_potential(profile, 1 - 1e-10) - radial_potential(profile, 1 + 1e-10));
  ctx.add(VerificationReport("radial_potential_continuity", {{"offset", 1e-10}}, jump, 0.0, jump,
                             ctx.tol("potential_continuity"), VerificationReport::Rule::at_most,
                             "|U(1 - offset) - U(1 + offset)|"));
  rows.clear();
  for (int i = 0; i <= 200; ++i) {
    const double r = 2.0 * i / 200;
    rows.push_back({r, profile(r), r == 0 ? built.spec.steady_potential(0.0) : radial_potential(profile, r)});
  }
  ctx.csv("steady_profile.csv", {"r", "rho_bar", "U"}, rows, {"radial_potential_far", "radial_potential_continuity"});

  const auto s = sample(built.spec, cfg.initial_data.particles, cfg.seed);
  const auto& e = s.ensemble;
  const double support = built.spec.spatial_radius;
  double widest = 0, fastest = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Eigen::VectorXd x = e.positions().row(i).transpose();
    widest = std::max(widest, x.norm());
    const double bound = built.spec.speed_bound(x);
    fastest = std::max(fastest, bound > 0 ? e.velocities().row(i).norm() / bound - 1 : 1e300);
  }
  ctx.add(VerificationReport("steady_support", {{"particles", e.size()}, {"support_radius", support}}, widest, support,
                             widest / support - 1, 0.0, VerificationReport::Rule::at_most,
                             "lhs = max |x|; support radius exp(M / mass)"));
  ctx.add(VerificationReport("steady_velocity_support", {{"particles", e.size()}}, fastest, 0.0, fastest, 1e-12,
                             VerificationReport::Rule::at_most, "max |v| / sqrt(2 (M - U(|x|))_+) - 1"));
  ctx.add(verify_moment_interpolation(e, 16, ctx.tol("interpolation")));
}

void preset_mb_moments(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.initial_data.family != "maxwell_boltzmann") {
    throw ConfigError("preset 'mb-moments' needs family maxwell_boltzmann", "initial_data.family");
  }
  const int n = dimension(cfg);
  const double p = cfg.initial_data.maxwell_power;
  const double R = cfg.initial_data.spatial_radius;
  const auto built = build_spec(cfg);
  const auto s = sample(built.spec, cfg.initial_data.particles, cfg.seed);
  ctx.log << "  acceptance " << s.acceptance << " over " << s.proposals << " proposals\n";
  std::vector<double> ks{0};
  ks.insert(ks.end(), cfg.analysis.moment_k.begin(), cfg.analysis.moment_k.end());
  std::vector<std::vector<double>> rows;
  for (const double k : ks) {
    auto r = verify_sampled_moment(s.ensemble, s.proposals, k, maxwell_boltzmann_moment(n, p, R, k),
                                   ctx.tol("moment_sigma"));
    rows.push_back({k, r.lhs(), r.rhs(), r.details().at("standard_error").get<double>()});
    ctx.add(std::move(r));
  }
  ctx.csv("mb_moments.csv", {"k", "sampled", "exact", "standard_error"}, rows, {"sampled_moment"});
  const double c0 = moment_growth_check(moment_map(s.ensemble, cfg.analysis.moment_k), n);
  const auto doubled = sample(built.spec, 2 * cfg.initial_data.particles, cfg.seed + 1);
  const double c0_doubled = moment_growth_check(moment_map(doubled.ensemble, cfg.analysis.moment_k), n);
  ctx.add(relative_stability("c0_stability", {{"particles", s.ensemble.size()}, {"maxwell_power", p}}, c0, c0_doubled,
                             ctx.tol("c0_stability")));
  const auto grid = GridSpec<double>::cube(n, -R, R, cfg.analysis.density_cells);
  ctx.add(verify_lp_moment(s.ensemble, 2.0, grid, ctx.tol("lp_moment")));
  ctx.add(verify_moment_interpolation(s.ensemble, 16, ctx.tol("interpolation")));
}

}  // namespace

InitialDataSpec initial_data_spec(const ExperimentConfig& config) { return build_spec(config).spec; }

PresetOutcome run_preset(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log,
                         const std::optional<fs::path>& resume) {
  fs::create_directories(out_dir);
  Context ctx(config, out_dir, log);
  log << "[" << config.experiment << "] config " << ctx.provenance.config_hash << " -> " << out_dir.string() << '\n';
  write_text(ctx.file("config.json"), config.to_json().dump(2) + "\n");
  if (resume && config.experiment != "thm3-run") {
    throw std::invalid_argument("--resume applies to thm3-run only");
  }
  Stopwatch sw;
  try {
    const auto& name = config.experiment;
    if (name == "stirling") preset_stirling(ctx);
    else if (name == "holder-scan") preset_holder_scan(ctx);
    else if (name == "thm3-static") preset_thm3_static(ctx);
    else if (name == "thm3-run") preset_thm3_run(ctx, resume);
    else if (name == "twin-flow") preset_twin_flow(ctx);
    else if (name == "moments") preset_moments(ctx);
    else if (name == "steady-radial") preset_steady_radial(ctx);
    else if (name == "mb-moments") preset_mb_moments(ctx);
    else throw std::invalid_argument("unknown preset '" + name + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    ctx.outcome.partial = true;
    ctx.outcome.failure = e.what();
    log << "  stage failed: " << e.what() << '\n';
  }
  json reports = reports_to_json(ctx.outcome.reports, ctx.provenance);
  reports["partial"] = ctx.outcome.partial;
  if (ctx.outcome.partial) reports["failure"] = ctx.outcome.failure;
  reports["seconds"] = sw.seconds();
  write_text(ctx.file("reports.json"), reports.dump(2) + "\n");
  write_text(ctx.file("summary.txt"), summary_table(ctx.outcome.reports));
  write_text(ctx.file("plot.py"), plot_script());
  log << "[" << config.experiment << "] " << (ctx.outcome.ok() ? "ok" : "FAILED") << " in " << sw.seconds() << " s\n";
  return std::move(ctx.outcome);
}

}  // namespace vpkit
