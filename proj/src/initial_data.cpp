#include "vpkit/initial_data.hpp"

#include "vpkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vpkit {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dimension(int n, const char* who) {
  if (n != 2 && n != 3) throw std::invalid_argument(std::string(who) + ": dimension must be 2 or 3");
}

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedProfile

TabulatedProfile::TabulatedProfile(std::vector<double> abscissae, std::vector<double> values)
    : abscissae_(std::move(abscissae)), values_(std::move(values)) {
  if (abscissae_.empty() || abscissae_.size() != values_.size()) {
    throw std::invalid_argument("TabulatedProfile: need matching, nonempty node arrays");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(abscissae_[i]) || !std::isfinite(values_[i])) {
      throw std::invalid_argument("TabulatedProfile: nodes must be finite");
    }
    if (values_[i] < 0) throw std::invalid_argument("TabulatedProfile: values must be nonnegative");
    if (i > 0 && abscissae_[i] < abscissae_[i - 1]) {
      throw std::invalid_argument("TabulatedProfile: abscissae must be nondecreasing");
    }
    if (i > 0 && values_[i] > values_[i - 1]) {
      throw std::invalid_argument("TabulatedProfile: profile must be nonincreasing");
    }
  }
  if (values_.back() != 0) {
    throw std::invalid_argument("TabulatedProfile: last node must have value 0 to declare a support bound M");
  }
}

TabulatedProfile TabulatedProfile::indicator_below(double c) { return TabulatedProfile({c, c}, {1.0, 0.0}); }

double TabulatedProfile::operator()(double e) const {
  if (e > abscissae_.back()) return 0;
  const auto it = std::lower_bound(abscissae_.begin(), abscissae_.end(), e);
  const auto i = static_cast<std::size_t>(it - abscissae_.begin());
  if (i == 0) return values_.front();
  if (abscissae_[i] == e) return values_[i];
  const double t = (e - abscissae_[i - 1]) / (abscissae_[i] - abscissae_[i - 1]);
  return values_[i - 1] + t * (values_[i] - values_[i - 1]);
}

double TabulatedProfile::integral_above(double e) const {
  const double M = abscissae_.back();
  if (e >= M) return 0;
  double total = 0;
  if (e < abscissae_.front()) {
    total += values_.front() * (abscissae_.front() - e);
    e = abscissae_.front();
  }
  for (std::size_t i = 0; i + 1 < abscissae_.size(); ++i) {
    const double a = abscissae_[i];
    const double b = abscissae_[i + 1];
    if (b <= e || b == a) continue;
    const double lo = std::max(a, e);
    const double flo = (*this)(lo == a ? a : lo);
    // right-limit at a when the segment starts at a jump
    const double fa = lo == a ? values_[i] : flo;
    total += 0.5 * (fa + values_[i + 1]) * (b - lo);
  }
  return total;
}

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("RadialProfile: need at least two nodes");
  for (const double v : values_) {
    if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("RadialProfile: values must be finite and >= 0");
  }
}

RadialProfile RadialProfile::uniform(double mass, int nodes) {
  if (nodes < 2) throw std::invalid_argument("RadialProfile::uniform: need at least two nodes");
  return RadialProfile(std::vector<double>(nodes, mass / kPi));
}

double RadialProfile::operator()(double r) const {
  r = std::abs(r);
  if (r > 1) return 0;
  const double h = spacing();
  const auto i = std::min(static_cast<std::size_t>(r / h), values_.size() - 2);
  const double t = (r - double(i) * h) / h;
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

namespace {

// 2 pi int_lo^hi (alpha + beta s) s ds
double linear_disk_mass(double alpha, double beta, double lo, double hi) {
  auto primitive = [&](double s) { return alpha * s * s / 2 + beta * s * s * s / 3; };
  return 2 * kPi * (primitive(hi) - primitive(lo));
}

}  // namespace

double RadialProfile::enclosed_mass(double r) const {
  r = std::min(std::abs(r), 1.0);
  const double h = spacing();
  double total = 0;
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
    const double a = double(i) * h;
    if (a >= r) break;
    const double b = std::min(double(i + 1) * h, r);
    const double beta = (values_[i + 1] - values_[i]) / h;
    const double alpha = values_[i] - beta * a;
    total += linear_disk_mass(alpha, beta, a, b);
  }
  return total;
}

double radial_l1_distance(const RadialProfile& a, const RadialProfile& b) {
  if (a.values().size() != b.values().size()) throw std::invalid_argument("radial_l1_distance: node mismatch");
  const double h = a.spacing();
  double total = 0;
  for (std::size_t i = 0; i + 1 < a.values().size(); ++i) {
    const double lo = double(i) * h;
    const double hi = double(i + 1) * h;
    const double d0 = a.values()[i] - b.values()[i];
    const double d1 = a.values()[i + 1] - b.values()[i + 1];
    const double beta = (d1 - d0) / h;
    const double alpha = d0 - beta * lo;
    if (d0 * d1 < 0) {
      const double root = lo + h * d0 / (d0 - d1);
      total += std::abs(linear_disk_mass(alpha, beta, lo, root)) + std::abs(linear_disk_mass(alpha, beta, root, hi));
    } else {
      total += std::abs(linear_disk_mass(alpha, beta, lo, hi));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Families

std::string to_string(Family family) {
  switch (family) {
    case Family::log_singular: return "log_singular";
    case Family::phi_family: return "phi_family";
    case Family::maxwell_boltzmann: return "maxwell_boltzmann";
    case Family::truncated_steady: return "truncated_steady";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "log_singular") return Family::log_singular;
  if (name == "phi_family") return Family::phi_family;
  if (name == "maxwell_boltzmann") return Family::maxwell_boltzmann;
  if (name == "truncated_steady") return Family::truncated_steady;
  throw std::invalid_argument("unknown initial-data family '" + name + "'");
}

double InitialDataSpec::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  const double h0 = modulator ? modulator(x, v) : 1.0;
  if (h0 == 0) return 0;
  switch (family) {
    case Family::log_singular:
    case Family::phi_family: {
      const double a = auxiliary ? auxiliary(x, v) : 0.0;
      return (*phi)(v.squaredNorm() + potential(x) + a) * h0;
    }
    case Family::maxwell_boltzmann: {
      const double s = v.norm();
      const double power = maxwell_power == 0 ? 1.0 : std::pow(s, maxwell_power);
      return std::exp(-std::pow(s, n)) * power * h0;
    }
    case Family::truncated_steady: {
      const double value = (*phi)(0.5 * v.squaredNorm() + steady_potential(x.norm()));
      return value > truncation_level ? 0.0 : value * h0;
    }
  }
  return 0;
}

InitialDataSpec make_family(TabulatedProfile phi, SpatialFunction potential, PhaseFunction auxiliary,
                            PhaseFunction modulator, int n, double spatial_radius, double modulator_bound) {
  require_dimension(n, "make_family");
  if (!potential) throw std::invalid_argument("make_family: potential is required");
  if (!(spatial_radius > 0) || !std::isfinite(spatial_radius)) {
    throw std::invalid_argument("make_family: spatial support radius must be finite and positive");
  }
  if (!(modulator_bound >= 0)) throw std::invalid_argument("make_family: modulator bound must be >= 0");
  InitialDataSpec spec;
  spec.family = Family::phi_family;
  spec.n = n;
  const double M = phi.support_bound();
  spec.f_inf_bound = phi.sup() * modulator_bound;
  spec.phi = std::move(phi);
  spec.potential = potential;
  spec.auxiliary = std::move(auxiliary);
  spec.modulator = std::move(modulator);
  spec.modulator_bound = modulator_bound;
  spec.spatial_radius = spatial_radius;
  // a >= 0 and supp(phi) in (-inf, M] give |v|^2 <= (M - Phi(x))_+
  spec.speed_bound = [potential, M, spatial_radius](const Eigen::VectorXd& x) {
    if (x.norm() > spatial_radius) return 0.0;
    const double room = M - potential(x);
    return room > 0 ? std::sqrt(room) : 0.0;
  };
  return spec;
}

InitialDataSpec make_log_singular(int n) {
  require_dimension(n, "make_log_singular");
  const double exponent = 2.0 / n;
  auto potential = [exponent](const Eigen::VectorXd& x) { return -std::pow(log_minus(x.norm()), exponent); };
  InitialDataSpec spec = make_family(TabulatedProfile::indicator_below(0.0), potential, {}, {}, n, 1.0, 1.0);
  spec.family = Family::log_singular;
  spec.exact_mass = log_singular::mass(n);
  return spec;
}

namespace log_singular {

double density(int n, double r) {
  return GeometricConstants::for_dimension(n).omega_n * log_minus(r);
}

double mass(int n) {
  const auto g = GeometricConstants::for_dimension(n);
  return g.omega_n * g.sigma_n / double(n * n);
}

double moment(int n, double k) {
  if (!(k >= 0)) throw std::invalid_argument("log_singular::moment: k must be >= 0");
  const double sigma = GeometricConstants::for_dimension(n).sigma_n;
  const double q = (k + n) / n;
  return sigma * sigma / (k + n) * std::exp(-(q + 1) * std::log(double(n)) + std::lgamma(q + 1));
}

double lp_norm(int n, double p) {
  if (!(p >= 1)) throw std::invalid_argument("log_singular::lp_norm: p must be >= 1");
  const auto g = GeometricConstants::for_dimension(n);
  const double log_integral = std::log(g.sigma_n) - (p + 1) * std::log(double(n)) + std::lgamma(p + 1);
  return g.omega_n * std::exp(log_integral / p);
}

double radial_cdf(int n, double r) {
  if (r <= 0) return 0;
  if (r >= 1) return 1;
  return std::pow(r, n) * (1 - n * std::log(r));
}

}  // namespace log_singular

InitialDataSpec make_maxwell_boltzmann(double p, PhaseFunction modulator, int n, double spatial_radius,
                                       double modulator_bound, double tail_tolerance) {
  require_dimension(n, "make_maxwell_boltzmann");
  if (!(p >= 0)) throw std::invalid_argument("make_maxwell_boltzmann: p must be >= 0");
  if (!(spatial_radius > 0) || !std::isfinite(spatial_radius)) {
    throw std::invalid_argument("make_maxwell_boltzmann: spatial support radius must be finite and positive");
  }
  if (!(modulator_bound >= 0) || !std::isfinite(modulator_bound)) {
    throw std::invalid_argument("make_maxwell_boltzmann: h0 must be bounded");
  }
  InitialDataSpec spec;
  spec.family = Family::maxwell_boltzmann;
  spec.n = n;
  spec.maxwell_power = p;
  spec.modulator = std::move(modulator);
  spec.modulator_bound = modulator_bound;
  spec.spatial_radius = spatial_radius;

  // Relative speed-tail mass beyond V: int_V^inf e^{-s^n} s^{p+n-1} ds / (Gamma((p+n)/n) / n).
  const double full = std::exp(std::lgamma((p + n) / n)) / n;
  auto tail = [&](double V) {
    auto f = [&](double s) { return std::exp(-std::pow(s, n)) * std::pow(s, p + n - 1); };
    return integrate_to_infinity(f, V).value / full;
  };
  double lo = 0, hi = 1;
  while (tail(hi) > tail_tolerance) hi *= 2;
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) > tail_tolerance ? lo : hi) = mid;
  }
  const double vmax = hi;
  spec.velocity_tail_mass = tail(vmax);
  spec.speed_bound = [vmax, spatial_radius](const Eigen::VectorXd& x) {
    return x.norm() > spatial_radius ? 0.0 : vmax;
  };
  // sup_s e^{-s^n} s^p is attained at s^n = p / n
  const double peak = p == 0 ? 1.0 : std::pow(p / n, p / n) * std::exp(-p / n);
  spec.f_inf_bound = peak * modulator_bound;
  return spec;
}

double maxwell_boltzmann_moment(int n, double p, double radius, double k) {
  const auto g = GeometricConstants::for_dimension(n);
  return g.omega_n * std::pow(radius, n) * g.sigma_n * std::exp(std::lgamma((k + p + n) / n)) / n;
}

// ---------------------------------------------------------------------------
// Radial potential and steady states

namespace {

double radial_potential_impl(const RadialProfile& profile, double r, const RadialPotentialOptions& options) {
  QuadratureOptions q;
  q.abs_tol = options.abs_tol;
  q.rel_tol = options.rel_tol;
  const double h = profile.spacing();
  const std::size_t segments = profile.values().size() - 1;
  double inner = 0;
  double outer = 0;
  for (std::size_t i = 0; i < segments; ++i) {
    const double a = double(i) * h;
    const double b = double(i + 1) * h;
    if (a < r) {
      inner += integrate([&](double s) { return 2 * kPi * s * profile(s); }, a, std::min(b, r), q).value;
    }
    if (b > r) {
      outer += integrate([&](double s) { return 2 * kPi * s * std::log(s) * profile(s); }, std::max(a, r), b, q).value;
    }
  }
  return r == 0 ? outer : std::log(r) * inner + outer;
}

}  // namespace

double radial_potential(const RadialProfile& profile, double r, const RadialPotentialOptions& options) {
  if (!(r >= 0)) throw std::invalid_argument("radial_potential: r must be >= 0");
  return radial_potential_impl(profile, r, options);
}

namespace {

// Cubic Hermite table of U on [0, R] using U'(r) = m(r) / r.
std::function<double(double)> tabulate_potential(const RadialProfile& profile, double extent, int nodes) {
  const double mass = profile.mass();
  const double step = extent / (nodes - 1);
  std::vector<double> u(nodes), du(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double r = j * step;
    u[j] = radial_potential_impl(profile, r, {});
    du[j] = r == 0 ? 0.0 : profile.enclosed_mass(r) / r;
  }
  return [=](double r) {
    if (r >= extent) return r >= 1 ? mass * std::log(r) : u.back();
    const int j = std::min(static_cast<int>(r / step), nodes - 2);
    const double t = (r - j * step) / step;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u[j] + (t3 - 2 * t2 + t) * step * du[j] + (-2 * t3 + 3 * t2) * u[j + 1] +
           (t3 - t2) * step * du[j + 1];
  };
}

}  // namespace

InitialDataSpec make_truncated_steady(const RadialProfile& profile, TabulatedProfile phi, double K,
                                      PhaseFunction modulator, int n, double modulator_bound) {
  if (n != 2) throw std::invalid_argument("make_truncated_steady: only n = 2 is supported");
  if (!(K > 0) || !std::isfinite(K)) throw std::invalid_argument("make_truncated_steady: K must be finite and > 0");
  const double mass = profile.mass();
  if (!(mass > 0)) throw std::invalid_argument("make_truncated_steady: rho_bar must have positive mass");
  const double M = phi.support_bound();
  const double support = std::exp(M / mass);

  InitialDataSpec spec;
  spec.family = Family::truncated_steady;
  spec.n = 2;
  spec.truncation_level = K;
  spec.f_inf_bound = std::min(K, phi.sup()) * modulator_bound;
  spec.modulator = std::move(modulator);
  spec.modulator_bound = modulator_bound;
  spec.steady_profile = profile;
  spec.spatial_radius = support;
  spec.steady_potential = tabulate_potential(profile, std::max(1.0, support), 4001);
  auto potential = spec.steady_potential;
  spec.speed_bound = [potential, M, support](const Eigen::VectorXd& x) {
    const double r = x.norm();
    if (r >= support) return 0.0;
    const double room = M - potential(r);
    return room > 0 ? std::sqrt(2 * room) : 0.0;
  };
  spec.phi = std::move(phi);
  return spec;
}

FixedPointResult steady_fixed_point(const TabulatedProfile& phi, double mass_target, int iterations,
                                    double damping, int radial_nodes) {
  if (!(damping > 0 && damping <= 1)) throw std::invalid_argument("steady_fixed_point: damping must be in (0, 1]");
  if (iterations < 1) throw std::invalid_argument("steady_fixed_point: need at least one iteration");
  if (!(mass_target >= 0)) throw std::invalid_argument("steady_fixed_point: mass target must be >= 0");
  FixedPointResult result;
  result.iterates.push_back(RadialProfile::uniform(mass_target, radial_nodes));
  double best = std::numeric_limits<double>::infinity();
  const double h = 1.0 / (radial_nodes - 1);
  for (int it = 0; it < iterations; ++it) {
    const RadialProfile& current = result.iterates.back();
    std::vector<double> next(radial_nodes);
    for (int i = 0; i < radial_nodes; ++i) {
      const double U = radial_potential_impl(current, i * h, {});
      // int phi(|v|^2/2 + U) dv = 2 pi int_U^M phi(e) de in two dimensions
      const double target = 2 * kPi * phi.integral_above(U);
      next[i] = (1 - damping) * current.values()[i] + damping * target;
    }
    RadialProfile updated(std::move(next));
    const double residual = radial_l1_distance(updated, current);
    result.iterates.push_back(std::move(updated));
    result.residuals.push_back(residual);
    best = std::min(best, residual);
    if (residual > 10 * best) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

PhiConditionResult verify_phi_condition(const SpatialFunction& potential, double radius, double M,
                                        const std::vector<double>& p_grid, int n) {
  require_dimension(n, "verify_phi_condition");
  if (!(radius > 0) || !std::isfinite(radius)) throw std::invalid_argument("verify_phi_condition: B must be bounded");
  // Angular rule: trapezoid in the polar angle (n = 2); Gauss-Legendre in
  // cos(theta) times trapezoid in azimuth (n = 3).
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> weights;
  if (n == 2) {
    const int m = 64;
    for (int i = 0; i < m; ++i) {
      const double t = 2 * kPi * (i + 0.5) / m;
      directions.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
      weights.push_back(2 * kPi / m);
    }
  } else {
    const int mz = 16, mphi = 32;
    std::vector<double> z(mz), wz(mz);
    gauss_legendre(mz, z.data(), wz.data());
    for (int i = 0; i < mz; ++i) {
      const double s = std::sqrt(1 - z[i] * z[i]);
      for (int j = 0; j < mphi; ++j) {
        const double t = 2 * kPi * (j + 0.5) / mphi;
        directions.push_back(Eigen::Vector3d(s * std::cos(t), s * std::sin(t), z[i]));
        weights.push_back(wz[i] * 2 * kPi / mphi);
      }
    }
  }

  PhiConditionResult out;
  for (const double p : p_grid) {
    if (!(p >= 1)) throw std::invalid_argument("verify_phi_condition: p must be >= 1");
    // r = radius e^{-s}, dr = r ds: int_0^inf r^n A(r) ds
    auto radial = [&](double s) {
      const double r = radius * std::exp(-s);
      // |r * direction| squares its entries and underflows to 0 below about
      // 1e-154; the tail past this cutoff is negligible
      if (r < 1e-150) return 0.0;
      // r^n room^p in log form: near s = inf, r^n underflows while room^p overflows
      const double log_rn = n * std::log(r);
      double sum = 0;
      for (std::size_t i = 0; i < directions.size(); ++i) {
        const double room = M - potential(r * directions[i]);
        if (room > 0) sum += weights[i] * std::exp(log_rn + p * std::log(room));
      }
      return sum;
    };
    const double integral = integrate_to_infinity(radial, 0.0).value;
    const double value = integral <= 0 ? 0.0 : std::pow(integral, double(n) / (2 * p)) / p;
    out.p.push_back(p);
    out.integrals.push_back(integral);
    out.values.push_back(value);
    out.c0 = std::max(out.c0, value);
  }
  return out;
}

}  // namespace vpkit
