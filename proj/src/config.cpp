#include "vpkit/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vpkit {

using nlohmann::json;

namespace {

// Walks one JSON object, pulling known keys and rejecting the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string field = child(key);
    try {
      check_type<T>(*it, field);
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("wrong type (") + e.what() + ")", field);
    }
  }

  Reader object(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    return Reader(it == j_.end() ? empty : *it, child(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key", child(key.c_str()));
    }
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  static void check_type(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("expected true or false", field);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("expected a string", field);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer", field);
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError("expected a nonnegative integer", field);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("expected a number", field);
    } else {
      if (!v.is_array()) throw ConfigError("expected an array", field);
      for (const auto& e : v) check_type<typename T::value_type>(e, field + "[]");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what, const std::string& field) {
  if (!ok) throw ConfigError(what, field);
}

void validate(const ExperimentConfig& c) {
  require(is_preset(c.experiment), "unknown experiment '" + c.experiment + "'", "experiment");
  const auto& d = c.initial_data;
  require(d.family == "log_singular" || d.family == "phi_family" || d.family == "maxwell_boltzmann" ||
              d.family == "truncated_steady",
          "unknown family '" + d.family + "'", "initial_data.family");
  require(d.n == 2 || d.n == 3, "must be 2 or 3", "initial_data.n");
  require(d.particles >= 1, "must be positive", "initial_data.particles");
  require(d.potential == "log_singular" || d.potential == "quadratic", "must be log_singular or quadratic",
          "initial_data.potential");
  require(d.phi_abscissae.size() == d.phi_values.size() && !d.phi_values.empty(), "phi node arrays must match",
          "initial_data.phi_values");
  require(d.spatial_radius > 0, "must be positive", "initial_data.spatial_radius");
  require(d.maxwell_power >= 0, "must be >= 0", "initial_data.maxwell_power");
  require(d.truncation_level > 0, "must be positive", "initial_data.truncation_level");
  require(d.iterations >= 1, "must be positive", "initial_data.iterations");
  require(d.damping > 0 && d.damping <= 1, "must lie in (0, 1]", "initial_data.damping");
  require(d.radial_nodes >= 2, "must be >= 2", "initial_data.radial_nodes");
  const auto& s = c.simulation;
  require(s.dt > 0, "must be positive", "simulation.dt");
  require(s.T >= s.dt, "must be >= dt", "simulation.T");
  require(s.output_interval > 0, "must be positive", "simulation.output_interval");
  require(s.softening >= 0, "must be >= 0", "simulation.softening");
  require(s.gamma == 1 || s.gamma == -1, "must be +1 or -1", "simulation.gamma");
  require(!s.p_grid.empty(), "must not be empty", "simulation.p_grid");
  for (const double p : s.p_grid) require(p >= 1, "entries must be >= 1", "simulation.p_grid");
  for (const double k : s.k_set) require(k >= 0, "entries must be >= 0", "simulation.k_set");
  require(s.grid_upper > s.grid_lower, "must exceed grid_lower", "simulation.grid_upper");
  require(s.grid_cells >= 1, "must be positive", "simulation.grid_cells");
  const auto& a = c.analysis;
  for (const int n : a.stirling_n) require(n == 2 || n == 3, "entries must be 2 or 3", "analysis.stirling_n");
  for (const double p : a.stirling_p) require(p >= 1, "entries must be >= 1", "analysis.stirling_p");
  for (const double p : a.envelope_p) require(p >= 1, "entries must be >= 1", "analysis.envelope_p");
  for (const double d2 : a.holder_d) require(d2 > 0 && d2 < 1, "entries must lie in (0, 1)", "analysis.holder_d");
  require(a.holder_cells >= 4, "must be >= 4", "analysis.holder_cells");
  require(a.density_cells >= 4, "must be >= 4", "analysis.density_cells");
  require(a.gronwall_p > d.n, "must exceed the dimension", "analysis.gronwall_p");
  require(a.perturbation_delta >= 0, "must be >= 0", "analysis.perturbation_delta");
  const auto defaults = default_tolerances();
  for (const auto& [key, value] : c.tolerances) {
    require(defaults.count(key) > 0, "unknown tolerance", "tolerances." + key);
    require(std::isfinite(value) && value >= 0, "must be finite and >= 0", "tolerances." + key);
  }
}

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::map<std::string, double> default_tolerances() {
  return {
      {"stirling", 1e-8},
      {"density_sigma", 3},
      {"density_fraction", 0.99},
      {"moment_sigma", 3},
      {"c0_stability", 0.1},
      {"holder_ceiling", 50},
      {"holder_growth", 0.2},
      {"interpolation", 1e-12},
      {"energy_drift", 1e-3},
      {"momentum", 1e-10},
      {"growth_margin", 0.01},
      {"lp_moment", 0.05},
      {"twin_ratio_low", 3},
      {"twin_ratio_high", 5},
      {"gronwall_stability", 0.2},
      {"potential_far", 1e-10},
      {"potential_continuity", 1e-8},
  };
}

json ExperimentConfig::to_json() const {
  const auto& d = initial_data;
  const auto& s = simulation;
  const auto& a = analysis;
  json tol = json::object();
  for (const auto& [k, v] : default_tolerances()) tol[k] = tolerance(k);
  return {
      {"experiment", experiment},
      {"seed", seed},
      {"output_dir", output_dir},
      {"initial_data",
       {{"family", d.family},
        {"n", d.n},
        {"particles", d.particles},
        {"potential", d.potential},
        {"phi_abscissae", d.phi_abscissae},
        {"phi_values", d.phi_values},
        {"spatial_radius", d.spatial_radius},
        {"maxwell_power", d.maxwell_power},
        {"truncation_level", d.truncation_level},
        {"mass_target", d.mass_target},
        {"iterations", d.iterations},
        {"damping", d.damping},
        {"radial_nodes", d.radial_nodes}}},
      {"simulation",
       {{"T", s.T},
        {"dt", s.dt},
        {"output_interval", s.output_interval},
        {"softening", s.softening},
        {"gamma", s.gamma},
        {"k_set", s.k_set},
        {"p_grid", s.p_grid},
        {"grid_lower", s.grid_lower},
        {"grid_upper", s.grid_upper},
        {"grid_cells", s.grid_cells}}},
      {"analysis",
       {{"stirling_n", a.stirling_n},
        {"stirling_p", a.stirling_p},
        {"envelope_p", a.envelope_p},
        {"holder_p", a.holder_p},
        {"holder_d", a.holder_d},
        {"holder_cells", a.holder_cells},
        {"moment_k", a.moment_k},
        {"density_cells", a.density_cells},
        {"gronwall_p", a.gronwall_p},
        {"perturbation_delta", a.perturbation_delta}}},
      {"verification", {{"assert", verification.assert_checks}, {"monitor_only", verification.monitor_only}}},
      {"tolerances", tol},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (j.is_null() || (j.is_object() && j.empty())) {
    throw ConfigError("empty configuration; required fields: experiment");
  }
  Reader root(j, "");
  if (!root.has("experiment")) throw ConfigError("missing required field", "experiment");
  ExperimentConfig c;
  root.get("experiment", c.experiment);
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);
  {
    auto r = root.object("initial_data");
    auto& d = c.initial_data;
    r.get("family", d.family);
    r.get("n", d.n);
    r.get("particles", d.particles);
    r.get("potential", d.potential);
    r.get("phi_abscissae", d.phi_abscissae);
    r.get("phi_values", d.phi_values);
    r.get("spatial_radius", d.spatial_radius);
    r.get("maxwell_power", d.maxwell_power);
    r.get("truncation_level", d.truncation_level);
    r.get("mass_target", d.mass_target);
    r.get("iterations", d.iterations);
    r.get("damping", d.damping);
    r.get("radial_nodes", d.radial_nodes);
    r.finish();
  }
  {
    auto r = root.object("simulation");
    auto& s = c.simulation;
    r.get("T", s.T);
    r.get("dt", s.dt);
    r.get("output_interval", s.output_interval);
    r.get("softening", s.softening);
    r.get("gamma", s.gamma);
    r.get("k_set", s.k_set);
    r.get("p_grid", s.p_grid);
    r.get("grid_lower", s.grid_lower);
    r.get("grid_upper", s.grid_upper);
    r.get("grid_cells", s.grid_cells);
    r.finish();
  }
  {
    auto r = root.object("analysis");
    auto& a = c.analysis;
    r.get("stirling_n", a.stirling_n);
    r.get("stirling_p", a.stirling_p);
    r.get("envelope_p", a.envelope_p);
    r.get("holder_p", a.holder_p);
    r.get("holder_d", a.holder_d);
    r.get("holder_cells", a.holder_cells);
    r.get("moment_k", a.moment_k);
    r.get("density_cells", a.density_cells);
    r.get("gronwall_p", a.gronwall_p);
    r.get("perturbation_delta", a.perturbation_delta);
    r.finish();
  }
  {
    auto r = root.object("verification");
    r.get("assert", c.verification.assert_checks);
    r.get("monitor_only", c.verification.monitor_only);
    r.finish();
  }
  {
    auto r = root.object("tolerances");
    const auto defaults = default_tolerances();
    for (const auto& [key, value] : defaults) {
      double v = value;
      r.get(key.c_str(), v);
      c.tolerances[key] = v;
    }
    r.finish();
  }
  root.finish();
  validate(c);
  return c;
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double ExperimentConfig::tolerance(const std::string& name) const {
  const auto it = tolerances.find(name);
  if (it != tolerances.end()) return it->second;
  const auto defaults = default_tolerances();
  const auto d = defaults.find(name);
  if (d == defaults.end()) throw std::out_of_range("unknown tolerance " + name);
  return d->second;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"stirling",  "holder-scan", "thm3-static",   "thm3-run",
                                              "twin-flow", "moments",     "steady-radial", "mb-moments"};
  return names;
}

bool is_preset(const std::string& name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ExperimentConfig preset_config(const std::string& name) {
  if (!is_preset(name)) throw std::invalid_argument("unknown preset '" + name + "'");
  ExperimentConfig c;
  c.experiment = name;
  c.output_dir = "out/" + name;
  c.tolerances = default_tolerances();
  auto& d = c.initial_data;
  auto& s = c.simulation;
  if (name == "thm3-static") {
    d.particles = 1'000'000;
  } else if (name == "thm3-run") {
    s.k_set.clear();
    for (int k = 0; k <= 16; ++k) s.k_set.push_back(k);
  } else if (name == "twin-flow") {
    s.k_set = {1, 2};
  } else if (name == "moments") {
    d.particles = 200'000;
    c.analysis.moment_k = {1, 2, 4, 8, 16, 32};
  } else if (name == "steady-radial") {
    d.family = "truncated_steady";
    d.particles = 20'000;
    d.phi_abscissae = {-1, 0};
    d.phi_values = {1, 0};
    d.truncation_level = 0.8;
    d.mass_target = 1;
    s.gamma = -1;
  } else if (name == "mb-moments") {
    d.family = "maxwell_boltzmann";
    d.particles = 200'000;
    d.maxwell_power = 2;
    c.analysis.moment_k = {1, 2, 4, 8};
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) {
    throw ConfigError("empty configuration; required fields: experiment");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax error at " + location(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("top level must be an object");
  if (!j.contains("experiment")) throw ConfigError("missing required field", "experiment");
  if (!j["experiment"].is_string()) throw ConfigError("expected a string", "experiment");
  const std::string name = j["experiment"].get<std::string>();
  if (!is_preset(name)) throw ConfigError("unknown experiment '" + name + "'", "experiment");
  json merged = preset_config(name).to_json();
  merged.merge_patch(j);
  // merge_patch drops nulls and merges objects; anything unknown survives
  // into the merged document and is rejected by the strict parse.
  return ExperimentConfig::from_json(merged);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig apply_override(const ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json j = config.to_json();
  json* node = &j;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object() || !node->contains(path[i])) throw ConfigError("unknown key", key);
    node = &(*node)[path[i]];
  }
  if (!node->is_object() || !node->contains(path.back())) throw ConfigError("unknown key", key);
  (*node)[path.back()] = value;
  return ExperimentConfig::from_json(j);
}

}  // namespace vpkit
