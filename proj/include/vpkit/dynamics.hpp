#pragma once

#include "vpkit/density.hpp"
#include "vpkit/ensemble.hpp"
#include "vpkit/geometry.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpkit {

/// Dyadic exponents {1, 2, 4, ..., 256}.
std::vector<double> default_p_grid();

struct SimulationConfig {
  KernelSpec<double> kernel{2, 1, 0.02};
  double T = 1;
  double dt = 1e-3;
  /// Diagnostics are recorded every output_interval time units (rounded to
  /// a whole number of steps) and at T.
  double output_interval = 0.01;
  std::vector<double> k_set{1, 2, 4, 8, 16};
  std::vector<double> p_grid = default_p_grid();
  GridSpec<double> grid = GridSpec<double>::cube(2, -2.0, 2.0, 128);
  std::uint64_t seed = 0;
  /// Uniform field added to the self-consistent one.
  std::optional<Eigen::VectorXd> external_field;

  /// Throws std::invalid_argument. `particles` enables the softening check.
  void validate(Eigen::Index particles = 0) const;
  /// Steps between diagnostics records.
  long long cadence() const;
};

/// Thrown when a step produces a non-finite coordinate.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, Eigen::Index particle) : std::runtime_error(what), particle_(particle) {}
  Eigen::Index particle() const { return particle_; }

 private:
  Eigen::Index particle_;
};

/// Field felt by every particle: the self-consistent field plus the
/// optional uniform external one.
PointMatrix<double> ensemble_field(const Ensemble& ensemble, const KernelSpec<double>& kernel,
                                   const std::optional<Eigen::VectorXd>& external = std::nullopt);

/// Velocity Verlet that keeps the field at the current positions between
/// steps, so each step costs one field evaluation.
class VerletIntegrator {
 public:
  VerletIntegrator(Ensemble ensemble, KernelSpec<double> kernel,
                   std::optional<Eigen::VectorXd> external = std::nullopt);

  /// Half kick, drift, field update, half kick. Throws StepError on a
  /// non-finite coordinate, leaving the state at the last good step.
  void step(double dt);

  const Ensemble& ensemble() const { return ensemble_; }
  const PointMatrix<double>& field() const { return field_; }
  /// max_i |E(x_i)| at the current positions.
  double field_sup() const { return field_sup_; }
  /// Largest field_sup seen over every field evaluation so far.
  double running_field_sup() const { return running_sup_; }

 private:
  void refresh_field();

  Ensemble ensemble_;
  KernelSpec<double> kernel_;
  std::optional<Eigen::VectorXd> external_;
  PointMatrix<double> field_;
  double field_sup_ = 0;
  double running_sup_ = 0;
};

/// One velocity-Verlet step from scratch (two field evaluations).
Ensemble step(const Ensemble& ensemble, double dt, const KernelSpec<double>& kernel,
              const std::optional<Eigen::VectorXd>& external = std::nullopt);

/// H = 1/2 sum w|v|^2 - (gamma/2) sum_{i != j} w_i w_j G(|x_i - x_j|) with
/// G = ln sqrt(r^2 + eps^2) for n = 2 and -1/sqrt(r^2 + eps^2) for n = 3.
/// The sign makes H a first integral of the softened particle dynamics.
double total_energy(const Ensemble& ensemble, const KernelSpec<double>& kernel);

struct DiagnosticsRecord {
  double time = 0;
  std::vector<double> moments;  // per k in the k-set
  std::vector<double> lp_norms;  // per p in the p-grid
  double uniqueness = 0;
  double uniqueness_p = 0;
  double rho_inf = 0;
  double field_sup = 0;          // max |E| over particles now
  double running_field_sup = 0;  // over every force evaluation up to now
  double energy = 0;
  Eigen::VectorXd momentum;
  double total_mass = 0;
  double mass_outside = 0;
};

struct DiagnosticsSeries {
  int n = 2;
  std::vector<double> k_set;
  std::vector<double> p_grid;
  GridSpec<double> grid;
  KernelSpec<double> kernel;
  double dt = 0;
  std::uint64_t seed = 0;
  std::vector<DiagnosticsRecord> records;
  bool failed = false;
  std::string failure;

  std::vector<double> times() const;
  /// Track of M_k over time; throws std::out_of_range if k was not recorded.
  std::vector<double> moment_track(double k) const;
};

DiagnosticsRecord record_diagnostics(const Ensemble& ensemble, double time, const SimulationConfig& config,
                                     double field_sup, double running_field_sup);

struct RunResult {
  DiagnosticsSeries series;
  Ensemble final_state;
  double final_time = 0;
};

/// Steps from start_time to config.T. A failing step ends the run early;
/// the partial series is returned with failed = true.
RunResult run(const Ensemble& initial, const SimulationConfig& config, double start_time = 0);

/// sum_i w_i |a_i - b_i| over index-paired particles.
double twin_flow_distance(const Ensemble& a, const Ensemble& b);

struct TwinFlowSeries {
  std::vector<double> times;
  std::vector<double> distance;
  /// ||rho_a(t)||_p on a.grid when track_p > 0.
  std::vector<double> rho_norm_a;
  Ensemble final_a;
  Ensemble final_b;
};

/// Evolves one initial ensemble under two configurations and records D(t)
/// at the common cadence. Both configurations must share T, the cadence in
/// time, kernel dimension and an integer ratio of steps per record.
TwinFlowSeries twin_flow(const Ensemble& initial, const SimulationConfig& a, const SimulationConfig& b,
                         double track_p = 0);

struct PerturbationResponse {
  std::vector<double> times;
  std::vector<double> ratio;  // D(t) / delta
  bool continuous = true;
  double largest_jump = 0;    // max |D(t_{i+1}) - D(t_i)|
};

/// Moves every particle by delta along a seeded random unit direction, runs
/// both ensembles, and reports D(t) / delta. `continuous` is false when D
/// jumps by more than a tenth of the total mass between records.
PerturbationResponse perturbation_response(const Ensemble& initial, double delta, const SimulationConfig& config);

}  // namespace vpkit
