#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpkit {

/// Parse or validation failure; `field` is the dotted path of the offending
/// entry when one applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field = {})
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct InitialDataConfig {
  std::string family = "log_singular";
  int n = 2;
  std::uint64_t particles = 2000;
  /// Phi for phi_family: "log_singular" gives -(ln_-|x|)^{2/n}, "quadratic" gives |x|^2 - 1.
  std::string potential = "log_singular";
  std::vector<double> phi_abscissae{0, 0};
  std::vector<double> phi_values{1, 0};
  double spatial_radius = 1;
  double maxwell_power = 0;
  double truncation_level = 10;
  double mass_target = 1;
  int iterations = 60;
  double damping = 0.5;
  int radial_nodes = 101;
};

struct SimulationSection {
  double T = 1;
  double dt = 1e-3;
  double output_interval = 0.01;
  double softening = 0.02;
  int gamma = 1;
  std::vector<double> k_set{1, 2, 4, 8, 16};
  std::vector<double> p_grid{1, 2, 4, 8, 16, 32, 64, 128, 256};
  double grid_lower = -2;
  double grid_upper = 2;
  int grid_cells = 128;
};

struct AnalysisSection {
  std::vector<int> stirling_n{2, 3};
  std::vector<double> stirling_p{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> envelope_p{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> holder_p{4, 8, 16, 32, 64};
  std::vector<double> holder_d{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 0.5};
  int holder_cells = 128;
  std::vector<double> moment_k{1, 2, 4, 8};
  int density_cells = 100;
  double gronwall_p = 64;
  double perturbation_delta = 1e-6;
};

struct VerificationSection {
  /// Exit nonzero when an asserted check fails.
  bool assert_checks = true;
  /// Claims reported but never asserted.
  std::vector<std::string> monitor_only;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 20240601;
  std::string output_dir = "out";
  InitialDataConfig initial_data;
  SimulationSection simulation;
  AnalysisSection analysis;
  VerificationSection verification;
  /// Named tolerances; only the keys of default_tolerances() are accepted.
  std::map<std::string, double> tolerances;

  nlohmann::json to_json() const;
  /// Strict: every key must be known and well typed.
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
  double tolerance(const std::string& name) const;
};

std::map<std::string, double> default_tolerances();

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
/// Defaults for a preset; throws std::invalid_argument for unknown names.
ExperimentConfig preset_config(const std::string& name);

/// Reads a JSON file, lays it over the defaults of its "experiment" preset
/// and parses strictly. Syntax errors carry line and column.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Applies "dotted.path=value"; value is parsed as JSON when possible and
/// taken as a string otherwise.
ExperimentConfig apply_override(const ExperimentConfig& config, const std::string& assignment);

}  // namespace vpkit
