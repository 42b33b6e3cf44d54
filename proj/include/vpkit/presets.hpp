#pragma once

#include "vpkit/analysis.hpp"
#include "vpkit/config.hpp"
#include "vpkit/initial_data.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vpkit {

struct PresetOutcome {
  std::vector<VerificationReport> reports;
  std::vector<std::filesystem::path> files;
  bool partial = false;  // a stage failed before finishing
  std::string failure;

  /// True when every asserted report passed and nothing was cut short.
  bool ok() const;
  /// Reports with the given claim id.
  std::vector<const VerificationReport*> find(const std::string& claim) const;
};

/// Initial data described by config.initial_data. Truncated steady states
/// run the fixed-point iteration first.
InitialDataSpec initial_data_spec(const ExperimentConfig& config);

/// Runs the preset named by config.experiment. Artifacts go to `out_dir`
/// (created if missing): CSV tables, diagnostics JSON, reports.json,
/// summary.txt, config.json and plot.py. Progress lines go to `log`.
/// `resume` names a checkpoint to continue from (thm3-run only).
PresetOutcome run_preset(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log,
                         const std::optional<std::filesystem::path>& resume = std::nullopt);

}  // namespace vpkit
