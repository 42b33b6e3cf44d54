// Acceptance run: executes the presets at their documented scale and prints
// one PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
//
// usage: vpkit_acceptance [output_dir]

#include "vpkit/config.hpp"
#include "vpkit/presets.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using vpkit::PresetOutcome;
using vpkit::VerificationReport;

namespace {

struct Timed {
  PresetOutcome outcome;
  double seconds = 0;
};

class Runner {
 public:
  explicit Runner(fs::path root) : root_(std::move(root)) {}

  const Timed& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    Timed t;
    t.outcome = vpkit::run_preset(vpkit::preset_config(name), root_ / name, log);
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << log.str();
    return cache_.emplace(name, std::move(t)).first->second;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::map<std::string, Timed> cache_;
};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  // Requires at least one report with this claim and all of them passing.
  void claims(const PresetOutcome& o, const std::string& claim) {
    const auto found = o.find(claim);
    if (found.empty()) {
      pass = false;
      detail << claim << " missing; ";
      return;
    }
    int failed = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto* r : found) {
      failed += !r->pass();
      worst = std::max(worst, r->residual());
    }
    pass = pass && failed == 0;
    detail << claim << " " << (found.size() - failed) << "/" << found.size() << " (worst residual "
           << std::setprecision(3) << worst << "); ";
  }

  void complete(const PresetOutcome& o, const std::string& preset) {
    if (o.partial) {
      pass = false;
      detail << preset << " cut short: " << o.failure << "; ";
    }
  }

  void runtime(double seconds, double limit) {
    pass = pass && seconds < limit;
    detail << std::fixed << std::setprecision(1) << seconds << " s (limit " << limit << " s); " << std::defaultfloat;
  }
};

// Every record of diagnostics.csv has a finite uniqueness value.
bool uniqueness_column_finite(const fs::path& csv, std::size_t& records) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // provenance
  std::getline(in, line);  // header
  std::vector<std::string> header;
  {
    std::istringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) header.push_back(cell);
  }
  std::size_t column = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "uniqueness") column = i;
  }
  if (column == header.size()) return false;
  records = 0;
  while (std::getline(in, line)) {
    std::istringstream s(line);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) std::getline(s, cell, ',');
    const double v = std::stod(cell);
    if (!std::isfinite(v)) return false;
    ++records;
  }
  return records > 0;
}

}  // namespace

int main(int argc, char** argv) {
  Runner runner(argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out"));
  int failures = 0;
  auto report = [&](int id, const std::string& title, Verdict& v) {
    failures += !v.pass;
    std::cout << "criterion " << std::setw(2) << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title << "  ["
              << v.detail.str() << "]" << std::endl;
  };

  try {
    {
      Verdict v;
      const auto& t = runner.get("stirling");
      v.complete(t.outcome, "stirling");
      v.claims(t.outcome, "stirling_identity");
      v.runtime(t.seconds, 1);
      report(1, "log-moment quadrature matches the closed form to 1e-8", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("thm3-static");
      v.complete(t.outcome, "thm3-static");
      v.claims(t.outcome, "density_histogram");
      v.runtime(t.seconds, 60);
      report(2, "sampled density matches omega_n ln_-|x| cell by cell", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("thm3-static");
      v.claims(t.outcome, "sampled_moment");
      v.claims(t.outcome, "c0_stability");
      report(3, "sampled moments match closed forms; C0 stable under N doubling", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("holder-scan");
      v.complete(t.outcome, "holder-scan");
      v.claims(t.outcome, "holder_ratio_bound");
      v.claims(t.outcome, "holder_ratio_tail");
      v.runtime(t.seconds, 300);
      report(4, "kernel-difference ratios bounded with no tail growth", v);
    }
    {
      Verdict v;
      for (const auto* name : {"thm3-static", "thm3-run", "moments", "steady-radial", "mb-moments"}) {
        const auto& t = runner.get(name);
        v.complete(t.outcome, name);
        v.claims(t.outcome, "moment_interpolation");
      }
      report(5, "moment interpolation holds on every ensemble and record", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("thm3-run");
      v.complete(t.outcome, "thm3-run");
      v.claims(t.outcome, "energy_conservation");
      v.claims(t.outcome, "momentum_conservation");
      v.runtime(t.seconds, 600);
      report(6, "energy drift <= 1e-3 and momentum drift <= 1e-10", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("thm3-run");
      v.claims(t.outcome, "moment_growth");
      v.claims(t.outcome, "moment_recursion");
      report(7, "moment growth within t sup|E| mass^{1/k}", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("twin-flow");
      v.complete(t.outcome, "twin-flow");
      v.claims(t.outcome, "twin_flow_convergence");
      v.claims(t.outcome, "gronwall_stability");
      report(8, "twin-flow distance shrinks by 3..5 per halving; Gronwall C stable", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("steady-radial");
      v.claims(t.outcome, "radial_potential_far");
      v.claims(t.outcome, "radial_potential_continuity");
      v.claims(t.outcome, "steady_support");
      report(9, "radial potential far field, continuity and support radius", v);
    }
    {
      Verdict v;
      const auto& t = runner.get("thm3-run");
      v.claims(t.outcome, "uniqueness_monitoring");
      std::size_t records = 0;
      const bool finite = uniqueness_column_finite(runner.root() / "thm3-run" / "diagnostics.csv", records);
      v.pass = v.pass && finite;
      v.detail << "diagnostics.csv uniqueness column " << (finite ? "finite" : "missing or non-finite") << " over "
               << records << " records";
      report(10, "uniqueness functional emitted at every record with grid metadata", v);
    }
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
