#pragma once

#include "vpkit/analysis.hpp"
#include "vpkit/dynamics.hpp"
#include "vpkit/ensemble.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpkit {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary ensemble file:
///   magic "VPENS1\n" (7 bytes)
///   header length L as little-endian uint64
///   L bytes of UTF-8 JSON: {"format", "n", "count", "columns", "f_inf_bound", ...}
///   one little-endian float64 column per entry of "columns", each `count` long:
///   x0..x{n-1}, v0..v{n-1}, w
/// Extra header members (time, config hash) are kept verbatim.
void write_ensemble(const std::filesystem::path& path, const Ensemble& ensemble,
                    const nlohmann::json& extra_header = nlohmann::json::object());

struct EnsembleFile {
  Ensemble ensemble;
  nlohmann::json header;
};

EnsembleFile read_ensemble(const std::filesystem::path& path);

/// Provenance written as the first line of every CSV:
/// "# config_hash=<hex> claims=<a;b;...>".
struct Provenance {
  std::string config_hash;
  std::vector<std::string> claims;
};

/// Header row plus rows of numbers, 17 significant digits.
void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const Provenance& provenance);

/// One row per record: time, M_k..., lp_p..., uniqueness, uniqueness_p,
/// rho_inf, field_sup, running_field_sup, energy, momentum_i..., total_mass,
/// mass_outside.
void write_series_csv(std::ostream& out, const DiagnosticsSeries& series, const Provenance& provenance);

/// Full metadata (grid, h, p-grid, k-set, seed, kernel) plus the records.
nlohmann::json series_to_json(const DiagnosticsSeries& series, const Provenance& provenance);

nlohmann::json reports_to_json(const std::vector<VerificationReport>& reports, const Provenance& provenance);

/// Matplotlib script that plots every CSV in its own directory.
std::string plot_script();

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vpkit
