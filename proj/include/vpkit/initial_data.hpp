#pragma once

#include "vpkit/ensemble.hpp"
#include "vpkit/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace vpkit {

/// Nonnegative, nonincreasing piecewise-linear profile phi(e).
///
/// Nodes are sorted by abscissa. Two nodes at the same abscissa encode a
/// jump, with the left value holding at the node itself. The profile is
/// constant to the left of the first node and zero to the right of the last
/// node. The last node must carry value 0; its abscissa is the support
/// bound M.
class TabulatedProfile {
 public:
  TabulatedProfile(std::vector<double> abscissae, std::vector<double> values);

  /// 1 on (-inf, c], 0 after.
  static TabulatedProfile indicator_below(double c);

  double operator()(double e) const;
  double support_bound() const { return abscissae_.back(); }
  double sup() const { return values_.front(); }
  /// Integral of phi over [e, M] (closed form).
  double integral_above(double e) const;

  const std::vector<double>& abscissae() const { return abscissae_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> abscissae_;
  std::vector<double> values_;
};

/// Radial density rho_bar(r) tabulated at r_i = i / (m - 1) on [0, 1],
/// linear in between and zero for r > 1.
class RadialProfile {
 public:
  explicit RadialProfile(std::vector<double> values);
  static RadialProfile uniform(double mass, int nodes = 2);

  double operator()(double r) const;
  /// 2 pi int_0^min(r,1) rho_bar(s) s ds, exact for the piecewise-linear profile.
  double enclosed_mass(double r) const;
  double mass() const { return enclosed_mass(1.0); }
  double spacing() const { return 1.0 / double(values_.size() - 1); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Exact L1(R^2) norm of the difference of two radial profiles on the same
/// nodes, splitting segments at sign changes.
double radial_l1_distance(const RadialProfile& a, const RadialProfile& b);

enum class Family { log_singular, phi_family, maxwell_boltzmann, truncated_steady };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

using SpatialFunction = std::function<double(const Eigen::VectorXd&)>;
using PhaseFunction = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Symbolic description of an initial density f0(x, v) together with the
/// support information the sampler needs.
struct InitialDataSpec {
  Family family = Family::phi_family;
  int n = 2;

  std::optional<TabulatedProfile> phi;
  SpatialFunction potential;  // Phi(x)
  PhaseFunction auxiliary;    // a(x, v) >= 0
  PhaseFunction modulator;    // h0(x, v)
  double modulator_bound = 1;

  double maxwell_power = 0;
  double truncation_level = std::numeric_limits<double>::infinity();  // K
  std::optional<RadialProfile> steady_profile;
  /// U(|x|) for truncated_steady, tabulated once at construction.
  std::function<double(double)> steady_potential;

  /// rho0 vanishes outside B(0, spatial_radius).
  double spatial_radius = 1;
  /// Largest speed on the support at x.
  std::function<double(const Eigen::VectorXd&)> speed_bound;
  /// Tail mass discarded by truncating an unbounded velocity support.
  double velocity_tail_mass = 0;
  /// Bound on ||f0||_inf.
  double f_inf_bound = 1;
  std::optional<double> exact_mass;

  double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
};

/// phi = 1_{R_-}, Phi(x) = -(ln_-|x|)^{2/n}, a = 0, so that
/// rho0(x) = omega_n ln_-|x|.
InitialDataSpec make_log_singular(int n);

/// Closed forms for the log-singular data.
namespace log_singular {
double density(int n, double r);
double mass(int n);
/// M_k(0) = sigma_n^2 n^{-(q+1)} Gamma(q+1) / (k+n) with q = (k+n)/n.
double moment(int n, double k);
/// ||rho0||_p = omega_n (sigma_n n^{-(p+1)} Gamma(p+1))^{1/p}.
double lp_norm(int n, double p);
/// Radial CDF of rho0: r^n (1 - n ln r) on [0, 1].
double radial_cdf(int n, double r);
}  // namespace log_singular

/// f0(x, v) = phi(|v|^2 + Phi(x) + a(x, v)) h0(x, v). rho0 must vanish
/// outside B(0, spatial_radius).
InitialDataSpec make_family(TabulatedProfile phi, SpatialFunction potential, PhaseFunction auxiliary,
                            PhaseFunction modulator, int n, double spatial_radius, double modulator_bound = 1);

/// f0(x, v) = exp(-|v|^n) |v|^p h0(x, v), velocity support truncated where
/// the relative tail mass drops below tail_tolerance.
InitialDataSpec make_maxwell_boltzmann(double p, PhaseFunction modulator, int n, double spatial_radius,
                                       double modulator_bound = 1, double tail_tolerance = 1e-10);

/// Moments of the Maxwell-Boltzmann data with h0 = 1_{B(0,R)}(x):
/// omega_n R^n sigma_n Gamma((k+p+n)/n) / n.
double maxwell_boltzmann_moment(int n, double p, double radius, double k);

struct RadialPotentialOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
};

/// U(r) = ln r int_{|y|<=r} rho_bar + int_{|y|>r} ln|y| rho_bar(|y|) dy by
/// quadrature over the profile's segments, for r >= 0. Equals mass * ln r
/// for r >= 1.
double radial_potential(const RadialProfile& profile, double r, const RadialPotentialOptions& options = {});

/// phi(|v|^2/2 + U(|x|)) 1{phi(...) <= K} h0(x, v) in two dimensions.
/// Spatial support radius exp(M / mass(rho_bar)).
InitialDataSpec make_truncated_steady(const RadialProfile& profile, TabulatedProfile phi, double K,
                                      PhaseFunction modulator, int n = 2, double modulator_bound = 1);

struct FixedPointResult {
  std::vector<RadialProfile> iterates;
  std::vector<double> residuals;  // residuals[j] = ||iterates[j+1] - iterates[j]||_L1
  bool diverged = false;
};

/// Damped Picard iteration rho <- (1 - damping) rho + damping int phi(|v|^2/2 + U[rho]) dv
/// on a radial grid of [0, 1], started from the uniform disk of the target
/// mass. Exploratory: convergence is reported, not guaranteed. Stops early
/// with diverged = true when the residual exceeds 10x its running minimum.
FixedPointResult steady_fixed_point(const TabulatedProfile& phi, double mass_target, int iterations,
                                    double damping, int radial_nodes = 201);

struct PhiConditionResult {
  std::vector<double> p;
  std::vector<double> integrals;  // int_B (M - Phi)_+^p dx
  std::vector<double> values;     // integral^{n/(2p)} / p
  double c0 = 0;
};

/// Fits C0 = max_p (int_B (M - Phi)_+^p dx)^{n/(2p)} / p over p_grid, for
/// B = B(0, radius).
PhiConditionResult verify_phi_condition(const SpatialFunction& potential, double radius, double M,
                                        const std::vector<double>& p_grid, int n);

struct SampleOptions {
  /// Error out if the fraction of proposals landing in the support is lower.
  double acceptance_floor = 1e-3;
  std::size_t block_size = 1 << 16;
};

struct SampleResult {
  Ensemble ensemble;
  double mass = 0;  // sum of weights
  bool mass_is_exact = false;
  double acceptance = 1;
  std::uint64_t proposals = 0;
};

/// Monte-Carlo realization of f0 with `count` particles, deterministic in
/// `seed`. Log-singular data is sampled exactly (inverse CDF in |x|,
/// uniform velocity ball, equal weights); other families use uniform
/// proposals on the support with weights f0 / proposal density.
SampleResult sample(const InitialDataSpec& spec, std::size_t count, std::uint64_t seed,
                    const SampleOptions& options = {});

}  // namespace vpkit
