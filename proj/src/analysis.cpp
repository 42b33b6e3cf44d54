#include "vpkit/analysis.hpp"

#include "vpkit/density.hpp"
#include "vpkit/moments.hpp"
#include "vpkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace vpkit {

namespace {

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double relative(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

VerificationReport::VerificationReport(std::string claim, nlohmann::json inputs, double lhs, double rhs,
                                       double residual, double tol, Rule rule, std::string note,
                                       nlohmann::json details)
    : claim_(std::move(claim)),
      inputs_(std::move(inputs)),
      lhs_(lhs),
      rhs_(rhs),
      residual_(residual),
      tol_(tol),
      rule_(rule),
      pass_(rule == Rule::at_most ? residual <= tol : std::isfinite(residual)),
      note_(std::move(note)),
      details_(std::move(details)) {}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["claim"] = claim_;
  j["inputs"] = inputs_;
  j["lhs"] = number(lhs_);
  j["rhs"] = number(rhs_);
  j["residual"] = number(residual_);
  j["tol"] = number(tol_);
  j["pass"] = pass_;
  j["mode"] = rule_ == Rule::at_most ? "assert" : "monitor";
  if (!note_.empty()) j["note"] = note_;
  if (!details_.empty()) j["details"] = details_;
  return j;
}

VerificationReport verify_stirling(int n, double p, double tol) {
  if (!(p >= 1)) throw std::invalid_argument("verify_stirling: p must be >= 1");
  const auto g = GeometricConstants::for_dimension(n);
  QuadratureOptions q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-13;
  auto integrand = [&](double r) { return r <= 0 ? 0.0 : std::pow(r, n - 1) * std::pow(-std::log(r), p); };
  const double lhs = g.sigma_n * integrate(integrand, 0.0, 1.0, q).value;
  const double rhs = g.sigma_n * std::exp(-(p + 1) * std::log(double(n)) + std::lgamma(p + 1));
  return VerificationReport("stirling_identity", {{"n", n}, {"p", p}}, lhs, rhs, relative(lhs, rhs), tol);
}

double growth_envelope_value(int n, double p) {
  if (!(p >= 1)) throw std::invalid_argument("growth_envelope_value: p must be >= 1");
  const double sigma = GeometricConstants::for_dimension(n).sigma_n;
  const double q = 2 * p / n;
  const double log_integral = std::log(sigma) - (q + 1) * std::log(double(n)) + std::lgamma(q + 1);
  return std::exp(log_integral / q) / p;
}

VerificationReport verify_growth_envelope(int n, const std::vector<double>& p_grid) {
  if (p_grid.empty()) throw std::invalid_argument("verify_growth_envelope: empty p grid");
  std::vector<double> p = p_grid;
  std::sort(p.begin(), p.end());
  std::vector<double> values;
  double C = 0;
  for (const double q : p) {
    values.push_back(growth_envelope_value(n, q));
    C = std::max(C, values.back());
  }
  // Gamma(q+1)^{1/q} ~ q/e with q = 2p/n, so the value tends to 2/(n^2 e)
  const double limit = 2.0 / (double(n * n) * std::exp(1.0));
  // Tail (p >= 8): nonincreasing and above the limit. The relative spread
  // is recorded only; it shrinks like 1/p and is about 0.3 at p = 8, n = 3.
  double violation = 0, spread = 0, tail_max = 0, tail_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 8) continue;
    violation = std::max(violation, (limit - values[i]) / limit);
    if (i > 0 && p[i - 1] >= 8) violation = std::max(violation, (values[i] - values[i - 1]) / values[i - 1]);
    tail_max = std::max(tail_max, values[i]);
    tail_min = std::min(tail_min, values[i]);
  }
  if (tail_max > 0) spread = tail_max / tail_min - 1;
  const double residual = std::isfinite(C) ? std::max(0.0, violation) : std::numeric_limits<double>::infinity();
  return VerificationReport("log_growth_envelope", {{"n", n}, {"p_grid", p}}, C, limit, residual, 0.0,
                            VerificationReport::Rule::at_most,
                            "lhs is the fitted C; rhs is the large-p limit 2/(n^2 e); residual is the worst tail "
                            "increase or shortfall below the limit, relative",
                            {{"values", values}, {"tail_spread", spread}});
}

VerificationReport verify_lp_moment(const Ensemble& ensemble, double k, const GridSpec<double>& grid, double tol) {
  if (!(k >= 1)) throw std::invalid_argument("verify_lp_moment: k must be >= 1");
  const int n = ensemble.dimension();
  const double F = ensemble.f_inf_bound();
  if (!(F > 0)) throw std::invalid_argument("verify_lp_moment: ensemble needs a positive f_inf_bound");
  const auto est = estimate_density(ensemble, grid);
  if (est.mass_outside > 0) {
    throw std::domain_error("verify_lp_moment: grid does not cover the ensemble (mass outside " +
                            std::to_string(est.mass_outside) + ")");
  }
  const double q = (k + n) / n;
  const double lhs = lp_norm(est.density, q);
  const double moment = velocity_moment(ensemble, k);
  nlohmann::json inputs = {{"k", k}, {"n", n}, {"f_inf", F}, {"h", grid.h}, {"particles", ensemble.size()}};
  if (moment == 0) {
    const bool vacuous = lhs > 0;
    return VerificationReport(
        "lp_moment_interpolation", inputs, lhs, 0.0, 0.0, tol, VerificationReport::Rule::at_most,
        vacuous ? "inequality uninformative at k: M_k = 0 while rho != 0 (velocity-concentrated measure); the "
                  "pointwise bound tends to 0 as R -> 0 and is not informative either"
                : "M_k = 0 and rho = 0");
  }
  const double omega = GeometricConstants::for_dimension(n).omega_n;
  const double rhs =
      interpolation_constant(k, n) * std::pow(omega * F, k / (k + n)) * std::pow(moment, double(n) / (k + n));
  return VerificationReport("lp_moment_interpolation", inputs, lhs, rhs, lhs / rhs - 1, tol,
                            VerificationReport::Rule::at_most, "residual = lhs/rhs - 1",
                            {{"ratio", lhs / rhs}, {"constant", interpolation_constant(k, n)}});
}

VerificationReport verify_lp_moment(double rho_norm, double f_inf, double moment, double k, int n, double tol) {
  if (!(k >= 1)) throw std::invalid_argument("verify_lp_moment: k must be >= 1");
  const double omega = GeometricConstants::for_dimension(n).omega_n;
  const double rhs =
      interpolation_constant(k, n) * std::pow(omega * f_inf, k / (k + n)) * std::pow(moment, double(n) / (k + n));
  nlohmann::json inputs = {{"k", k}, {"n", n}, {"f_inf", f_inf}, {"moment", moment}};
  if (rhs == 0) {
    return VerificationReport("lp_moment_interpolation", inputs, rho_norm, 0.0, 0.0, tol,
                              VerificationReport::Rule::at_most, "inequality uninformative at k: right side is 0");
  }
  return VerificationReport("lp_moment_interpolation", inputs, rho_norm, rhs, rho_norm / rhs - 1, tol,
                            VerificationReport::Rule::at_most, "residual = lhs/rhs - 1",
                            {{"ratio", rho_norm / rhs}, {"constant", interpolation_constant(k, n)}});
}

std::vector<VerificationReport> verify_moment_recursion(const DiagnosticsSeries& series, double total_mass,
                                                        const MomentRecursionOptions& options) {
  const auto& rec = series.records;
  if (rec.empty()) throw std::invalid_argument("verify_moment_recursion: empty series");
  auto has = [&](double k) { return std::find(series.k_set.begin(), series.k_set.end(), k) != series.k_set.end(); };
  auto track = [&](double k) {
    if (k == 0) {
      if (has(0.0)) return series.moment_track(0.0);
      return std::vector<double>(rec.size(), total_mass);
    }
    return series.moment_track(k);
  };
  const auto times = series.times();

  std::vector<double> orders;
  for (const double k : series.k_set) {
    if (k >= 1) orders.push_back(k);
  }
  if (orders.empty()) throw std::invalid_argument("verify_moment_recursion: no recorded moment with k >= 1");

  // interpolation
  double worst_interp = 0;
  std::vector<double> interp_checked;
  for (const double k : orders) {
    if (k - 1 != 0 && !has(k - 1)) continue;
    interp_checked.push_back(k);
    const auto mk = track(k);
    const auto mk1 = track(k - 1);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const double bound = std::pow(total_mass, 1 / k) * std::pow(mk[i], 1 - 1 / k);
      if (bound > 0 || mk1[i] > 0) worst_interp = std::max(worst_interp, (mk1[i] - bound) / std::max(bound, mk1[i]));
    }
  }
  if (interp_checked.empty()) {
    throw std::invalid_argument("verify_moment_recursion: no consecutive moment orders recorded");
  }

  // integral recursion and k-uniform growth
  double worst_rec = -std::numeric_limits<double>::infinity();
  double worst_growth = -std::numeric_limits<double>::infinity();
  nlohmann::json growth_rows = nlohmann::json::array();
  for (const double k : orders) {
    const auto mk = track(k);
    const auto mk1 = has(k - 1) || k == 1 ? track(k - 1) : std::vector<double>{};
    double integral = 0;
    double sup_mk1 = mk1.empty() ? 0.0 : mk1[0];
    double worst_k = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const double S = rec[i].running_field_sup;
      if (!mk1.empty()) {
        if (i > 0) {
          const double step = times[i] - times[i - 1];
          integral += 0.5 * step * (mk1[i] + mk1[i - 1]);
          sup_mk1 = std::max(sup_mk1, mk1[i]);
          const double rhs = mk[0] + k * S * integral + 2 * step * k * S * sup_mk1;
          const double scale = std::max(std::abs(rhs), 1e-300);
          worst_rec = std::max(worst_rec, (mk[i] - rhs) / scale);
        }
      }
      const double t = times[i] - times[0];
      const double lhs = std::pow(mk[i], 1 / k) - std::pow(mk[0], 1 / k);
      const double rhs = t * S * std::pow(total_mass, 1 / k) * (1 + options.growth_margin);
      const double scale = std::max({std::abs(rhs), std::pow(mk[0], 1 / k), 1e-300});
      // rounding in the k-th roots is the only slack the discrete flow needs
      const double excess = (lhs - rhs) / scale - 1e-13;
      worst_k = std::max(worst_k, excess);
    }
    worst_growth = std::max(worst_growth, worst_k);
    growth_rows.push_back({{"k", k}, {"worst_excess", worst_k}});
  }
  if (!std::isfinite(worst_rec)) worst_rec = 0;

  std::vector<VerificationReport> out;
  out.emplace_back("moment_interpolation", nlohmann::json{{"k", interp_checked}, {"records", rec.size()}},
                   worst_interp, 0.0, worst_interp, options.interpolation_tol, VerificationReport::Rule::at_most,
                   "residual = max relative excess of M_{k-1} over mass^{1/k} M_k^{1-1/k}");
  out.emplace_back("moment_recursion", nlohmann::json{{"k", orders}, {"records", rec.size()}}, worst_rec, 0.0,
                   worst_rec, 0.0, VerificationReport::Rule::at_most,
                   "residual = max relative excess of M_k(t) over M_k(0) + k S int M_{k-1} + trapezoid slack");
  out.emplace_back("moment_growth", nlohmann::json{{"k", orders}, {"margin", options.growth_margin}}, worst_growth,
                   0.0, worst_growth, 0.0, VerificationReport::Rule::at_most,
                   "residual = max relative excess of M_k(t)^{1/k} - M_k(0)^{1/k} over t S(t) mass^{1/k} (1 + margin)",
                   nlohmann::json{{"per_k", growth_rows}});
  return out;
}

std::vector<double> gronwall_double_integral(const std::vector<double>& times, const std::vector<double>& D, double p,
                                             int n) {
  if (times.size() != D.size()) throw std::invalid_argument("gronwall: times and D differ in length");
  if (!(p > n)) throw std::invalid_argument("gronwall: p must exceed n");
  const std::size_t m = times.size();
  std::vector<double> F(m, 0.0);
  if (m == 0) return F;
  const double e = 1 - double(n) / p;
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(D[i] >= 0)) throw std::invalid_argument("gronwall: D must be nonnegative");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("gronwall: times must increase");
    g[i] = D[i] == 0 ? 0.0 : std::pow(D[i], e);
  }
  auto exponent = [&](std::size_t i) {  // power-law exponent on [t_i, t_{i+1}]
    return std::log(g[i + 1] / g[i]) / std::log(times[i + 1] / times[i]);
  };
  double G = 0;  // int_0^{t_i} g
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double t0 = times[i], t1 = times[i + 1], h = t1 - t0;
    double inner = 0.5 * h * (g[i] + g[i + 1]);
    double outer = h * h * (g[i] / 3 + g[i + 1] / 6);
    if (g[i] > 0 && g[i + 1] > 0 && t0 > 0) {
      const double a = exponent(i);
      const double ratio = t1 / t0;
      const double lr = std::log(ratio);
      const double i1 = std::abs(a + 1) < 1e-12 ? lr : std::expm1((a + 1) * lr) / (a + 1);
      const double i2 = std::abs(a + 2) < 1e-12 ? lr : std::expm1((a + 2) * lr) / (a + 2);
      inner = g[i] * t0 * i1;
      outer = t1 * inner - g[i] * t0 * t0 * i2;
    } else if (t0 == 0 && g[i] == 0 && g[i + 1] > 0 && i + 2 < m && g[i + 2] > 0) {
      // power law through the origin with the exponent of the next interval
      const double a = exponent(i + 1);
      if (a > -1) {
        inner = g[i + 1] * t1 / (a + 1);
        outer = t1 * inner - g[i + 1] * t1 * t1 / (a + 2);
      }
    }
    F[i + 1] = F[i] + G * h + outer;
    G += inner;
  }
  return F;
}

GronwallFit gronwall_fit(const std::vector<double>& times, const std::vector<double>& D, double p, int n,
                         const std::vector<double>& rho_p_norms) {
  GronwallFit fit;
  fit.F = gronwall_double_integral(times, D, p, n);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (D[i] > 0) {
      const double c = fit.F[i] > 0 ? D[i] / (p * p * fit.F[i]) : std::numeric_limits<double>::infinity();
      if (c > fit.C) {
        fit.C = c;
        fit.argmax_time = times[i];
      }
    }
    if (times[i] > 0 && fit.F[i] > 0) {
      fit.C_envelope = std::max(fit.C_envelope, std::pow(fit.F[i], double(n) / (2 * p)) / times[i]);
    }
  }
  if (!rho_p_norms.empty()) {
    const double largest = *std::max_element(rho_p_norms.begin(), rho_p_norms.end());
    fit.C_rho = fit.C / (1 + largest / p);
  }
  return fit;
}

VerificationReport gronwall_check(const std::vector<double>& times, const std::vector<double>& D, double p, int n,
                                  const std::vector<double>& rho_p_norms) {
  const auto fit = gronwall_fit(times, D, p, n, rho_p_norms);
  const double residual = std::isfinite(fit.C) && std::isfinite(fit.C_envelope) ? 0.0
                                                                                 : std::numeric_limits<double>::infinity();
  return VerificationReport(
      "gronwall_consistency", {{"p", p}, {"n", n}, {"records", times.size()}}, fit.C, fit.C_envelope, residual, 0.0,
      VerificationReport::Rule::monitor_only,
      "consistency report: lhs is the smallest C with D <= C p^2 F on the series, rhs the envelope constant C' with "
      "F <= (C' t)^{2p/n}; D includes truncation error, so no absolute bound is asserted",
      {{"C_rho", fit.C_rho}, {"argmax_time", fit.argmax_time}, {"F", fit.F}});
}

VerificationReport verify_moment_interpolation(const Ensemble& ensemble, int k_max, double tol) {
  if (k_max < 1) throw std::invalid_argument("verify_moment_interpolation: k_max must be >= 1");
  const double mass = ensemble.total_mass();
  double worst = 0;
  double previous = velocity_moment(ensemble, 0.0);
  for (int k = 1; k <= k_max; ++k) {
    const double mk = velocity_moment(ensemble, double(k));
    const double bound = std::pow(mass, 1.0 / k) * std::pow(mk, 1 - 1.0 / k);
    const double scale = std::max(bound, previous);
    if (scale > 0) worst = std::max(worst, (previous - bound) / scale);
    previous = mk;
  }
  return VerificationReport("moment_interpolation", {{"k_max", k_max}, {"particles", ensemble.size()}}, worst, 0.0,
                            worst, tol, VerificationReport::Rule::at_most,
                            "residual = max relative excess of M_{k-1} over mass^{1/k} M_k^{1-1/k}");
}

VerificationReport verify_sampled_moment(const Ensemble& ensemble, std::uint64_t proposals, double k, double exact,
                                         double sigmas) {
  if (proposals < std::uint64_t(ensemble.size()) || proposals == 0) {
    throw std::invalid_argument("verify_sampled_moment: proposals must be >= particle count");
  }
  const auto& v = ensemble.velocities();
  const auto& w = ensemble.weights();
  double m = 0, m2 = 0;
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const double a = w[i] * (k == 0 ? 1.0 : std::pow(v.row(i).norm(), k));
    m += a;
    m2 += a * a;
  }
  const double se = std::sqrt(std::max(0.0, m2 - m * m / double(proposals)));
  const double z = se > 0 ? std::abs(m - exact) / se : (m == exact ? 0.0 : std::numeric_limits<double>::infinity());
  return VerificationReport("sampled_moment", {{"k", k}, {"particles", ensemble.size()}, {"proposals", proposals}}, m,
                            exact, z, sigmas, VerificationReport::Rule::at_most,
                            "residual = |sampled - exact| / standard error", {{"standard_error", se}});
}

VerificationReport verify_density_histogram(const Ensemble& ensemble, const GridSpec<double>& grid,
                                            const std::function<double(Eigen::Index)>& exact_cell_mass,
                                            double r_min, double r_max, double sigmas, double fraction,
                                            HistogramComparison* table) {
  const auto est = estimate_density(ensemble, grid);
  const double N = double(ensemble.size());
  const double mass = ensemble.total_mass();
  const double w = mass / N;
  const double volume = grid.cell_volume();
  std::size_t compared = 0, within = 0;
  double worst = 0;
  for (Eigen::Index c = 0; c < grid.cell_count(); ++c) {
    const double r = grid.cell_center(c).norm();
    if (r < r_min || r > r_max) continue;
    const double cell_mass = exact_cell_mass(c);
    const double prob = std::clamp(cell_mass / mass, 0.0, 1.0);
    const double se = w * std::sqrt(N * prob * (1 - prob)) / volume;
    const double expected = cell_mass / volume;
    const double z = se > 0 ? std::abs(est.density.values[c] - expected) / se : 0.0;
    ++compared;
    if (z <= sigmas) ++within;
    worst = std::max(worst, z);
    if (table) {
      table->radius.push_back(r);
      table->observed.push_back(est.density.values[c]);
      table->expected.push_back(expected);
      table->standard_error.push_back(se);
    }
  }
  if (compared == 0) throw std::invalid_argument("verify_density_histogram: no cells in the radial window");
  const double share = double(within) / double(compared);
  return VerificationReport("density_histogram",
                            {{"cells", compared}, {"h", grid.h}, {"r_min", r_min}, {"r_max", r_max},
                             {"sigmas", sigmas}, {"particles", ensemble.size()}},
                            share, fraction, fraction - share, 0.0, VerificationReport::Rule::at_most,
                            "lhs = share of cells within sigmas standard errors; pass when lhs >= rhs",
                            {{"worst_z", worst}});
}

std::string summary_table(const std::vector<VerificationReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(26) << "claim" << std::setw(6) << "pass" << std::right << std::setw(16) << "lhs"
      << std::setw(16) << "rhs" << std::setw(14) << "residual" << std::setw(12) << "tol" << "  inputs\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(26) << r.claim() << std::setw(6)
        << (r.rule() == VerificationReport::Rule::monitor_only ? (r.pass() ? "mon" : "MON!") : (r.pass() ? "yes" : "NO"))
        << std::right << std::setprecision(8) << std::setw(16) << r.lhs() << std::setw(16) << r.rhs()
        << std::setprecision(3) << std::setw(14) << r.residual() << std::setw(12) << r.tol() << "  "
        << r.inputs().dump() << '\n';
  }
  return out.str();
}

}  // namespace vpkit
