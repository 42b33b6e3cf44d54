#pragma once

#include "vpkit/dynamics.hpp"
#include "vpkit/ensemble.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vpkit {

/// Outcome of one numerical check. `pass` is decided at construction from
/// the residual and tolerance and never changes afterwards.
class VerificationReport {
 public:
  enum class Rule {
    at_most,       // pass iff residual <= tol
    monitor_only,  // pass iff residual is finite; nothing asserted
  };

  VerificationReport(std::string claim, nlohmann::json inputs, double lhs, double rhs, double residual, double tol,
                     Rule rule = Rule::at_most, std::string note = {}, nlohmann::json details = nlohmann::json::object());

  const std::string& claim() const { return claim_; }
  const nlohmann::json& inputs() const { return inputs_; }
  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }
  double residual() const { return residual_; }
  double tol() const { return tol_; }
  bool pass() const { return pass_; }
  Rule rule() const { return rule_; }
  const std::string& note() const { return note_; }
  const nlohmann::json& details() const { return details_; }

  /// {claim, inputs, lhs, rhs, residual, tol, pass} plus note and details
  /// when present. Non-finite numbers are written as strings.
  nlohmann::json to_json() const;

 private:
  std::string claim_;
  nlohmann::json inputs_;
  double lhs_, rhs_, residual_, tol_;
  Rule rule_;
  bool pass_;
  std::string note_;
  nlohmann::json details_;
};

/// Radial quadrature of int (ln_-|x|)^p dx against sigma_n n^{-(p+1)} Gamma(p+1).
VerificationReport verify_stirling(int n, double p, double tol = 1e-8);

/// Per-p value (int (ln_-|x|)^{2p/n} dx)^{n/(2p)} / p from the closed form.
double growth_envelope_value(int n, double p);

/// Fits C = max_p growth_envelope_value over p_grid and checks that the
/// tail (p >= 8) decreases monotonically toward the limit 2/(n^2 e)
/// without crossing it. The tail's max/min - 1 goes in details.
VerificationReport verify_growth_envelope(int n, const std::vector<double>& p_grid);

/// ||rho||_{(k+n)/n} against C_k (omega_n ||f||_inf)^{k/(k+n)} M_k^{n/(k+n)}
/// with the explicit interpolation constant C_k. The left side comes from
/// the gridded density, the right side from particle moments. Passes when
/// lhs <= rhs (1 + tol); tol absorbs histogram noise.
VerificationReport verify_lp_moment(const Ensemble& ensemble, double k, const GridSpec<double>& grid,
                                    double tol = 0.05);

/// Same inequality from already known quantities (analytic data).
VerificationReport verify_lp_moment(double rho_norm, double f_inf, double moment, double k, int n, double tol = 0.0);

struct MomentRecursionOptions {
  double interpolation_tol = 1e-12;
  double growth_margin = 1e-2;
};

/// Three checks on a run:
///  interpolation  M_{k-1} <= mass^{1/k} M_k^{1-1/k} at every record;
///  recursion      M_k(t) <= M_k(0) + k S(t) int_0^t M_{k-1}, trapezoid with
///                 slack 2 dt_rec k S(t) sup M_{k-1}, dt_rec the record spacing;
///  growth         M_k(t)^{1/k} - M_k(0)^{1/k} <= t S(t) mass^{1/k} (1 + margin),
/// where S(t) is the running sup of |E| over particles. k = 1 uses the
/// mass as M_0. The interpolation check covers every k with k - 1 also
/// recorded; the other two cover every recorded k >= 1.
std::vector<VerificationReport> verify_moment_recursion(const DiagnosticsSeries& series, double total_mass,
                                                        const MomentRecursionOptions& options = {});

struct GronwallFit {
  std::vector<double> F;      // int_0^t int_0^s D^{1-n/p}
  double C = 0;               // max D / (p^2 F)
  double C_rho = 0;           // C / (1 + max ||rho||_p / p) when densities are given
  double C_envelope = 0;      // max F^{n/(2p)} / t
  double argmax_time = 0;
};

/// Double integral F(t) = int_0^t int_0^s D(tau)^{1-n/p} dtau ds by product
/// integration: D^{1-n/p} is interpolated as a power law on each interval
/// (linearly where it vanishes), so D = c t^a is integrated exactly.
std::vector<double> gronwall_double_integral(const std::vector<double>& times, const std::vector<double>& D, double p,
                                             int n);

GronwallFit gronwall_fit(const std::vector<double>& times, const std::vector<double>& D, double p, int n,
                         const std::vector<double>& rho_p_norms = {});

/// Consistency report: passes when the fitted constants are finite. The
/// discrete D(t) contains truncation error, so no absolute bound is asserted.
VerificationReport gronwall_check(const std::vector<double>& times, const std::vector<double>& D, double p, int n,
                                  const std::vector<double>& rho_p_norms = {});

/// M_{k-1} <= mass^{1/k} M_k^{1-1/k} for k = 1..k_max on one ensemble.
VerificationReport verify_moment_interpolation(const Ensemble& ensemble, int k_max, double tol = 1e-12);

/// Monte-Carlo check of a sampled moment against its exact value. With
/// `proposals` draws of which the ensemble kept the accepted ones, the
/// standard error of sum w |v|^k is sqrt(sum (w |v|^k)^2 - M^2 / proposals);
/// this covers equal weights (proposals = N) and importance weights alike.
VerificationReport verify_sampled_moment(const Ensemble& ensemble, std::uint64_t proposals, double k, double exact,
                                         double sigmas = 3);

/// Cell-by-cell comparison of the histogram with exact cell masses, over
/// cells whose center satisfies r_min <= |x_c| <= r_max. The binomial
/// standard error assumes equal weights. Passes when at least `fraction`
/// of the compared cells lie within `sigmas` standard errors.
struct HistogramComparison {
  std::vector<double> radius, observed, expected, standard_error;
};
VerificationReport verify_density_histogram(const Ensemble& ensemble, const GridSpec<double>& grid,
                                            const std::function<double(Eigen::Index)>& exact_cell_mass,
                                            double r_min, double r_max, double sigmas, double fraction,
                                            HistogramComparison* table = nullptr);

/// Aligned summary table, one line per report.
std::string summary_table(const std::vector<VerificationReport>& reports);

}  // namespace vpkit
