#include "vpkit/dynamics.hpp"

#include "vpkit/moments.hpp"
#include "vpkit/random.hpp"

#include <algorithm>
#include <cmath>

namespace vpkit {

std::vector<double> default_p_grid() {
  std::vector<double> p;
  for (double q = 1; q <= 256; q *= 2) p.push_back(q);
  return p;
}

void SimulationConfig::validate(Eigen::Index particles) const {
  kernel.validate();
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("SimulationConfig: dt must be positive");
  if (!(T >= dt) || !std::isfinite(T)) throw std::invalid_argument("SimulationConfig: T must be finite and >= dt");
  if (!(output_interval > 0)) throw std::invalid_argument("SimulationConfig: output_interval must be positive");
  grid.validate();
  if (grid.n != kernel.n) throw std::invalid_argument("SimulationConfig: grid and kernel dimensions differ");
  for (const double k : k_set) {
    if (!(k >= 0)) throw std::invalid_argument("SimulationConfig: moment orders must be >= 0");
  }
  if (p_grid.empty()) throw std::invalid_argument("SimulationConfig: p grid is empty");
  for (const double p : p_grid) {
    if (!(p >= 1)) throw std::invalid_argument("SimulationConfig: p grid entries must be >= 1");
  }
  if (external_field && external_field->size() != kernel.n) {
    throw std::invalid_argument("SimulationConfig: external field has the wrong dimension");
  }
  if (particles > 1 && kernel.softening == 0) {
    throw std::invalid_argument("SimulationConfig: self-consistent runs with more than one particle need softening > 0");
  }
}

long long SimulationConfig::cadence() const { return std::max(1LL, std::llround(output_interval / dt)); }

PointMatrix<double> ensemble_field(const Ensemble& ensemble, const KernelSpec<double>& kernel,
                                   const std::optional<Eigen::VectorXd>& external) {
  PointMatrix<double> e = self_field(ensemble.as_sources(), kernel);
  if (external) e.rowwise() += external->transpose();
  return e;
}

namespace {

void check_finite(const Ensemble& ensemble) {
  const auto& x = ensemble.positions();
  const auto& v = ensemble.velocities();
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    if (!x.row(i).allFinite() || !v.row(i).allFinite()) {
      throw StepError("step: particle " + std::to_string(i) + " has a non-finite coordinate", i);
    }
  }
}

double row_sup(const PointMatrix<double>& e) { return e.rows() == 0 ? 0.0 : e.rowwise().norm().maxCoeff(); }

}  // namespace

VerletIntegrator::VerletIntegrator(Ensemble ensemble, KernelSpec<double> kernel, std::optional<Eigen::VectorXd> external)
    : ensemble_(std::move(ensemble)), kernel_(kernel), external_(std::move(external)) {
  if (kernel_.n != ensemble_.dimension()) throw std::invalid_argument("VerletIntegrator: dimension mismatch");
  refresh_field();
}

void VerletIntegrator::refresh_field() {
  field_ = ensemble_field(ensemble_, kernel_, external_);
  field_sup_ = row_sup(field_);
  running_sup_ = std::max(running_sup_, field_sup_);
}

void VerletIntegrator::step(double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  Ensemble next = ensemble_;
  next.velocities() += 0.5 * dt * field_;
  next.positions() += dt * next.velocities();
  PointMatrix<double> e = ensemble_field(next, kernel_, external_);
  next.velocities() += 0.5 * dt * e;
  check_finite(next);
  ensemble_ = std::move(next);
  field_ = std::move(e);
  field_sup_ = row_sup(field_);
  running_sup_ = std::max(running_sup_, field_sup_);
}

Ensemble step(const Ensemble& ensemble, double dt, const KernelSpec<double>& kernel,
              const std::optional<Eigen::VectorXd>& external) {
  VerletIntegrator integrator(ensemble, kernel, external);
  integrator.step(dt);
  return integrator.ensemble();
}

double total_energy(const Ensemble& ensemble, const KernelSpec<double>& kernel) {
  kernel.validate();
  const auto& x = ensemble.positions();
  const auto& v = ensemble.velocities();
  const auto& w = ensemble.weights();
  const Eigen::Index count = ensemble.size();
  double kinetic = 0;
  for (Eigen::Index i = 0; i < count; ++i) kinetic += 0.5 * w[i] * v.row(i).squaredNorm();
  const double eps2 = kernel.softening * kernel.softening;
  double pair_sum = 0;
#if defined(VPKIT_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : pair_sum)
#endif
  for (Eigen::Index i = 0; i < count; ++i) {
    double row = 0;
    for (Eigen::Index j = i + 1; j < count; ++j) {
      const double r2 = (x.row(i) - x.row(j)).squaredNorm() + eps2;
      if (r2 == 0) throw std::domain_error("total_energy: coincident particles without softening");
      const double g = kernel.n == 2 ? 0.5 * std::log(r2) : -1.0 / std::sqrt(r2);
      row += w[j] * g;
    }
    pair_sum += w[i] * row;
  }
  // (gamma / 2) over ordered pairs is gamma over unordered ones
  return kinetic - kernel.gamma * pair_sum;
}

std::vector<double> DiagnosticsSeries::times() const {
  std::vector<double> t;
  for (const auto& r : records) t.push_back(r.time);
  return t;
}

std::vector<double> DiagnosticsSeries::moment_track(double k) const {
  const auto it = std::find(k_set.begin(), k_set.end(), k);
  if (it == k_set.end()) throw std::out_of_range("DiagnosticsSeries: moment k = " + std::to_string(k) + " not recorded");
  const auto idx = static_cast<std::size_t>(it - k_set.begin());
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.moments[idx]);
  return out;
}

DiagnosticsRecord record_diagnostics(const Ensemble& ensemble, double time, const SimulationConfig& config,
                                     double field_sup, double running_field_sup) {
  DiagnosticsRecord r;
  r.time = time;
  for (const double k : config.k_set) r.moments.push_back(velocity_moment(ensemble, k));
  const auto est = estimate_density(ensemble, config.grid);
  for (const double p : config.p_grid) r.lp_norms.push_back(lp_norm(est.density, p));
  const auto u = uniqueness_functional(est.density, std::span<const double>(config.p_grid));
  r.uniqueness = u.value;
  r.uniqueness_p = u.argmax_p;
  r.rho_inf = lp_norm(est.density, std::numeric_limits<double>::infinity());
  r.field_sup = field_sup;
  r.running_field_sup = running_field_sup;
  r.energy = total_energy(ensemble, config.kernel);
  r.momentum = ensemble.momentum();
  r.total_mass = ensemble.total_mass();
  r.mass_outside = est.mass_outside;
  return r;
}

RunResult run(const Ensemble& initial, const SimulationConfig& config, double start_time) {
  config.validate(initial.size());
  if (initial.dimension() != config.kernel.n) throw std::invalid_argument("run: ensemble and kernel dimensions differ");
  if (!(start_time >= 0) || start_time >= config.T) throw std::invalid_argument("run: start time must lie in [0, T)");

  RunResult out;
  auto& series = out.series;
  series.n = config.kernel.n;
  series.k_set = config.k_set;
  series.p_grid = config.p_grid;
  series.grid = config.grid;
  series.kernel = config.kernel;
  series.dt = config.dt;
  series.seed = config.seed;

  VerletIntegrator integrator(initial, config.kernel, config.external_field);
  const double remaining = config.T - start_time;
  const long long steps = std::max(1LL, static_cast<long long>(std::ceil(remaining / config.dt - 1e-9)));
  const long long offset = std::llround(start_time / config.dt);
  const long long cadence = config.cadence();
  double time = start_time;
  series.records.push_back(
      record_diagnostics(integrator.ensemble(), time, config, integrator.field_sup(), integrator.running_field_sup()));
  for (long long s = 1; s <= steps; ++s) {
    const double h = s < steps ? config.dt : remaining - double(steps - 1) * config.dt;
    try {
      integrator.step(h);
    } catch (const StepError& e) {
      series.failed = true;
      series.failure = e.what() + std::string(" at t = ") + std::to_string(time + h);
      break;
    }
    time = s < steps ? start_time + double(s) * config.dt : config.T;
    if ((offset + s) % cadence == 0 || s == steps) {
      series.records.push_back(record_diagnostics(integrator.ensemble(), time, config, integrator.field_sup(),
                                                  integrator.running_field_sup()));
    }
  }
  out.final_state = integrator.ensemble();
  out.final_time = time;
  return out;
}

double twin_flow_distance(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size() || a.dimension() != b.dimension()) {
    throw std::invalid_argument("twin_flow_distance: ensembles differ in size or dimension");
  }
  double d = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    d += a.weights()[i] * (a.positions().row(i) - b.positions().row(i)).norm();
  }
  return d;
}

TwinFlowSeries twin_flow(const Ensemble& initial, const SimulationConfig& a, const SimulationConfig& b,
                         double track_p) {
  a.validate(initial.size());
  b.validate(initial.size());
  if (a.kernel.n != b.kernel.n || a.kernel.n != initial.dimension()) {
    throw std::invalid_argument("twin_flow: dimension mismatch");
  }
  const long long ca = a.cadence();
  const long long cb = b.cadence();
  const double interval = double(ca) * a.dt;
  if (std::abs(double(cb) * b.dt - interval) > 1e-9 * interval) {
    throw std::invalid_argument("twin_flow: the two configurations record at different times");
  }
  if (std::abs(a.T - b.T) > 1e-12 * a.T) throw std::invalid_argument("twin_flow: horizons differ");
  const long long records = std::llround(a.T / interval);
  if (std::abs(double(records) * interval - a.T) > 1e-9 * a.T) {
    throw std::invalid_argument("twin_flow: T must be a whole number of record intervals");
  }

  VerletIntegrator ia(initial, a.kernel, a.external_field);
  VerletIntegrator ib(initial, b.kernel, b.external_field);
  TwinFlowSeries out;
  auto track = [&] {
    if (track_p > 0) out.rho_norm_a.push_back(lp_norm(estimate_density(ia.ensemble(), a.grid).density, track_p));
  };
  out.times.push_back(0);
  out.distance.push_back(0);
  track();
  for (long long r = 1; r <= records; ++r) {
    for (long long s = 0; s < ca; ++s) ia.step(a.dt);
    for (long long s = 0; s < cb; ++s) ib.step(b.dt);
    out.times.push_back(double(r) * interval);
    out.distance.push_back(twin_flow_distance(ia.ensemble(), ib.ensemble()));
    track();
  }
  out.final_a = ia.ensemble();
  out.final_b = ib.ensemble();
  return out;
}

PerturbationResponse perturbation_response(const Ensemble& initial, double delta, const SimulationConfig& config) {
  if (!(delta >= 0)) throw std::invalid_argument("perturbation_response: delta must be >= 0");
  config.validate(initial.size());
  Ensemble moved = initial;
  auto rng = substream(config.seed, 0x7065727475ull);
  for (Eigen::Index i = 0; i < moved.size(); ++i) {
    moved.positions().row(i) += delta * random_direction(initial.dimension(), rng).transpose();
  }
  VerletIntegrator base(initial, config.kernel, config.external_field);
  VerletIntegrator pert(moved, config.kernel, config.external_field);
  const long long steps = std::llround(config.T / config.dt);
  const long long cadence = config.cadence();
  PerturbationResponse out;
  auto record = [&](double t) {
    const double d = twin_flow_distance(base.ensemble(), pert.ensemble());
    const double ratio = delta == 0 ? 0.0 : d / delta;
    if (!out.ratio.empty()) {
      const double jump = std::abs(d - out.ratio.back() * delta);
      out.largest_jump = std::max(out.largest_jump, jump);
    }
    out.times.push_back(t);
    out.ratio.push_back(ratio);
  };
  record(0);
  for (long long s = 1; s <= steps; ++s) {
    base.step(config.dt);
    pert.step(config.dt);
    if (s % cadence == 0 || s == steps) record(double(s) * config.dt);
  }
  const double mass = initial.total_mass();
  out.continuous = std::all_of(out.ratio.begin(), out.ratio.end(), [](double r) { return std::isfinite(r); }) &&
                   out.largest_jump <= 0.1 * mass;
  return out;
}

}  // namespace vpkit
