// vpkit command line: run, verify, sample, report.
//
// Exit status: 0 success, 1 an asserted check failed or a run was cut
// short, 2 usage error, 3 configuration error.

#include "vpkit/config.hpp"
#include "vpkit/io.hpp"
#include "vpkit/presets.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_config = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigOptions {
  std::string target;
  std::vector<std::string> sets;
  std::optional<double> dt, T;
  std::optional<std::uint64_t> particles, seed;
  bool no_assert = false;

  void attach(CLI::App& app) {
    app.add_option("target", target, "Preset name or JSON configuration file")->required();
    app.add_option("--set", sets, "Override a field, e.g. simulation.dt=5e-4 (repeatable)");
    app.add_option("--dt", dt, "Time step");
    app.add_option("--T", T, "Final time");
    app.add_option("--N", particles, "Particle count");
    app.add_option("--seed", seed, "Root seed");
    app.add_flag("--no-assert", no_assert, "Report every check without asserting");
  }

  // Precedence: preset defaults, file, --set, dedicated flags.
  vpkit::ExperimentConfig resolve() const {
    vpkit::ExperimentConfig cfg;
    if (vpkit::is_preset(target)) {
      cfg = vpkit::preset_config(target);
    } else if (fs::is_regular_file(target)) {
      cfg = vpkit::load_config(target);
    } else {
      std::string names;
      for (const auto& n : vpkit::preset_names()) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("'" + target + "' is neither a preset (" + names + ") nor a readable file");
    }
    for (const auto& s : sets) cfg = vpkit::apply_override(cfg, s);
    auto set = [&](const std::string& path, const json& value) {
      cfg = vpkit::apply_override(cfg, path + "=" + value.dump());
    };
    if (dt) set("simulation.dt", *dt);
    if (T) set("simulation.T", *T);
    if (particles) set("initial_data.particles", *particles);
    if (seed) set("seed", *seed);
    if (no_assert) set("verification.assert", false);
    return cfg;
  }
};

int cmd_run(const ConfigOptions& opts, const std::string& out, const std::string& resume) {
  const auto cfg = opts.resolve();
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) / cfg.experiment : fs::path(out);
  std::optional<fs::path> checkpoint;
  if (!resume.empty()) checkpoint = resume;
  const auto outcome = vpkit::run_preset(cfg, dir, std::cerr, checkpoint);
  std::cout << vpkit::summary_table(outcome.reports);
  if (outcome.partial) std::cout << "partial output: " << outcome.failure << '\n';
  std::cout << "artifacts in " << dir.string() << '\n';
  return outcome.ok() ? exit_ok : exit_failed;
}

int cmd_verify(const ConfigOptions& opts, const std::string& echo) {
  const auto cfg = opts.resolve();
  const std::string text = cfg.to_json().dump(2) + "\n";
  // the echo must parse back to the same configuration
  if (vpkit::parse_config_text(text).hash() != cfg.hash()) {
    std::cerr << "error: configuration does not round-trip\n";
    return exit_config;
  }
  if (echo.empty()) {
    std::cout << text;
  } else {
    vpkit::write_text(echo, text);
  }
  std::cout << "config_hash " << cfg.hash() << '\n';
  return exit_ok;
}

int cmd_sample(const ConfigOptions& opts, const std::string& out) {
  const auto cfg = opts.resolve();
  const auto spec = vpkit::initial_data_spec(cfg);
  const auto s = vpkit::sample(spec, cfg.initial_data.particles, cfg.seed);
  const fs::path path = out.empty() ? fs::path(cfg.output_dir) / (cfg.experiment + ".vpens") : fs::path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  vpkit::write_ensemble(path, s.ensemble,
                        {{"N", s.ensemble.size()},
                         {"seed", cfg.seed},
                         {"family", cfg.initial_data.family},
                         {"mass", s.mass},
                         {"proposals", s.proposals},
                         {"acceptance", s.acceptance},
                         {"spatial_radius", spec.spatial_radius},
                         {"config_hash", cfg.hash()}});
  std::cout << "wrote " << s.ensemble.size() << " particles (mass " << std::setprecision(12) << s.mass << ") to "
            << path.string() << '\n';
  return exit_ok;
}

std::string number(const json& v) {
  if (!v.is_number()) return v.is_string() ? v.get<std::string>() : v.dump();
  std::ostringstream s;
  s << std::setprecision(4) << v.get<double>();
  return s.str();
}

int cmd_report(const std::string& dir, bool emit_plot) {
  const fs::path file = fs::path(dir) / "reports.json";
  std::ifstream in(file);
  if (!in) throw UsageError("no reports.json in " + dir);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw vpkit::ConfigError(std::string("malformed reports.json: ") + e.what());
  }
  const auto& reports = doc.at("reports");
  int asserted = 0, failed = 0, monitored = 0;
  std::cout << std::left << std::setw(30) << "claim" << std::setw(9) << "status" << std::setw(12) << "residual"
            << "tol\n";
  for (const auto& r : reports) {
    const bool monitor = r.value("mode", "") == "monitor";
    const bool pass = r.at("pass").get<bool>();
    monitored += monitor;
    asserted += !monitor;
    failed += !monitor && !pass;
    std::cout << std::setw(30) << r.at("claim").get<std::string>() << std::setw(9)
              << (monitor ? "monitor" : (pass ? "pass" : "FAIL")) << std::setw(12) << number(r.at("residual"))
              << number(r.at("tol")) << '\n';
  }
  const bool partial = doc.value("partial", false);
  std::cout << asserted << " asserted, " << failed << " failed, " << monitored << " monitored";
  if (doc.contains("config_hash")) std::cout << ", config " << doc["config_hash"].get<std::string>();
  std::cout << '\n';
  if (partial) std::cout << "partial output: " << doc.value("failure", std::string("unknown")) << '\n';
  if (emit_plot) {
    vpkit::write_text(fs::path(dir) / "plot.py", vpkit::plot_script());
    std::cout << "plot script: " << (fs::path(dir) / "plot.py").string() << '\n';
  }
  return failed == 0 && !partial ? exit_ok : exit_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle Vlasov-Poisson simulator and verification suite"};
  app.require_subcommand(1);

  ConfigOptions run_opts, verify_opts, sample_opts;
  std::string run_out, resume, echo, sample_out, report_dir;
  bool emit_plot = false;

  auto* run = app.add_subcommand("run", "Run a preset or configuration and write its artifacts");
  run_opts.attach(*run);
  run->add_option("--out", run_out, "Output directory (default <output_dir>/<experiment>)");
  run->add_option("--resume", resume, "Continue thm3-run from a checkpoint.vpens")->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Validate a configuration, echo it with defaults and print its hash");
  verify_opts.attach(*verify);
  verify->add_option("--echo", echo, "Write the echoed configuration here instead of stdout");

  auto* sample = app.add_subcommand("sample", "Sample the initial data into a binary ensemble file");
  sample_opts.attach(*sample);
  sample->add_option("--out", sample_out, "Ensemble file (default <output_dir>/<experiment>.vpens)");

  auto* report = app.add_subcommand("report", "Summarize reports.json of an output directory");
  report->add_option("dir", report_dir, "Output directory of a run")->required();
  report->add_flag("--plot", emit_plot, "Write plot.py next to the CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*run) return cmd_run(run_opts, run_out, resume);
    if (*verify) return cmd_verify(verify_opts, echo);
    if (*sample) return cmd_sample(sample_opts, sample_out);
    return cmd_report(report_dir, emit_plot);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const vpkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const vpkit::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failed;
  }
}
