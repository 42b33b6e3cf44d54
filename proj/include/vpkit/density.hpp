#pragma once

#include "vpkit/ensemble.hpp"
#include "vpkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace vpkit {

/// Axis-aligned box of cubic cells: origin is the lower corner, every axis
/// has cells_per_axis cells of width h.
template <typename Scalar = double>
struct GridSpec {
  int n = 2;
  VectorX<Scalar> origin;
  Scalar h = 1;
  int cells_per_axis = 1;

  /// The cube [lower, upper]^n split into `cells` cells per axis.
  static GridSpec cube(int n, Scalar lower, Scalar upper, int cells) {
    if (!(upper > lower) || cells < 1) throw std::invalid_argument("GridSpec::cube: empty box");
    GridSpec g;
    g.n = n;
    g.origin = VectorX<Scalar>::Constant(n, lower);
    g.h = (upper - lower) / Scalar(cells);
    g.cells_per_axis = cells;
    g.validate();
    return g;
  }

  void validate() const {
    if (n != 2 && n != 3) throw std::invalid_argument("GridSpec: dimension must be 2 or 3");
    if (origin.size() != n) throw std::invalid_argument("GridSpec: origin has wrong dimension");
    if (!(h > 0) || cells_per_axis < 1) throw std::invalid_argument("GridSpec: h and cells_per_axis must be positive");
  }

  Eigen::Index cell_count() const {
    Eigen::Index c = 1;
    for (int d = 0; d < n; ++d) c *= cells_per_axis;
    return c;
  }
  Scalar cell_volume() const { return std::pow(h, n); }

  /// Multi-index of a flat cell index; axis 0 varies fastest.
  Eigen::Vector3i unflatten(Eigen::Index flat) const {
    Eigen::Vector3i idx = Eigen::Vector3i::Zero();
    for (int d = 0; d < n; ++d) {
      idx[d] = static_cast<int>(flat % cells_per_axis);
      flat /= cells_per_axis;
    }
    return idx;
  }

  VectorX<Scalar> cell_center(Eigen::Index flat) const {
    const Eigen::Vector3i idx = unflatten(flat);
    VectorX<Scalar> c(n);
    for (int d = 0; d < n; ++d) c[d] = origin[d] + (Scalar(idx[d]) + Scalar(0.5)) * h;
    return c;
  }

  VectorX<Scalar> cell_lower(Eigen::Index flat) const {
    const Eigen::Vector3i idx = unflatten(flat);
    VectorX<Scalar> c(n);
    for (int d = 0; d < n; ++d) c[d] = origin[d] + Scalar(idx[d]) * h;
    return c;
  }

  /// Flat index of the cell containing x, or -1 outside the box. The upper
  /// faces belong to the box.
  template <typename Derived>
  Eigen::Index locate(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::Index flat = 0;
    Eigen::Index stride = 1;
    for (int d = 0; d < n; ++d) {
      const Scalar u = (x[d] - origin[d]) / h;
      if (!(u >= 0) || u > Scalar(cells_per_axis)) return -1;
      const int i = std::min(static_cast<int>(u), cells_per_axis - 1);
      flat += i * stride;
      stride *= cells_per_axis;
    }
    return flat;
  }
};

/// Piecewise-constant density on a GridSpec (mass per unit volume).
template <typename Scalar = double>
struct DensityField {
  GridSpec<Scalar> grid;
  VectorX<Scalar> values;

  DensityField() = default;
  explicit DensityField(GridSpec<Scalar> g) : grid(std::move(g)), values(VectorX<Scalar>::Zero(grid.cell_count())) {
    grid.validate();
  }

  /// Samples f at cell centers.
  template <typename F>
  static DensityField sampled(GridSpec<Scalar> g, F&& f) {
    DensityField field(std::move(g));
    for (Eigen::Index c = 0; c < field.values.size(); ++c) field.values[c] = f(field.grid.cell_center(c));
    return field;
  }

  int dimension() const { return grid.n; }

  Scalar integral() const {
    Scalar s = 0;
    for (Eigen::Index c = 0; c < values.size(); ++c) s += values[c];
    return s * grid.cell_volume();
  }

  /// Value at a point; zero outside the grid.
  template <typename Derived>
  Scalar at(const Eigen::MatrixBase<Derived>& x) const {
    const auto c = grid.locate(x);
    return c < 0 ? Scalar(0) : values[c];
  }
};

template <typename Scalar = double>
struct DensityEstimate {
  DensityField<Scalar> density;
  Scalar mass_outside = 0;
  Eigen::Index particles_outside = 0;
};

namespace detail {

template <typename Scalar, typename WeightFn>
DensityEstimate<Scalar> deposit(const ParticleEnsemble<Scalar>& ensemble, const GridSpec<Scalar>& grid,
                                WeightFn&& weight_of) {
  if (ensemble.dimension() != grid.n) throw std::invalid_argument("estimate_density: dimension mismatch");
  DensityEstimate<Scalar> out{DensityField<Scalar>(grid), 0, 0};
  VectorX<Scalar> cell_mass = VectorX<Scalar>::Zero(grid.cell_count());
  const auto& x = ensemble.positions();
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const Scalar w = weight_of(i);
    const auto c = grid.locate(x.row(i).transpose());
    if (c < 0) {
      out.mass_outside += w;
      ++out.particles_outside;
    } else {
      cell_mass[c] += w;
    }
  }
  out.density.values = cell_mass / grid.cell_volume();
  return out;
}

}  // namespace detail

/// Histogram deposit: each cell holds (sum of weights in the cell) / h^n.
/// Mass that falls outside the box is reported, never dropped silently.
template <typename Scalar>
DensityEstimate<Scalar> estimate_density(const ParticleEnsemble<Scalar>& ensemble, const GridSpec<Scalar>& grid) {
  const auto& w = ensemble.weights();
  return detail::deposit(ensemble, grid, [&](Eigen::Index i) { return w[i]; });
}

/// Cell-local velocity moment density m_k(x) = (sum_{i in cell} w_i |v_i|^k) / h^n.
template <typename Scalar>
DensityEstimate<Scalar> estimate_moment_density(const ParticleEnsemble<Scalar>& ensemble,
                                                const GridSpec<Scalar>& grid, Scalar k) {
  if (!(k >= 0)) throw std::invalid_argument("estimate_moment_density: k must be >= 0");
  const auto& w = ensemble.weights();
  const auto& v = ensemble.velocities();
  return detail::deposit(ensemble, grid, [&](Eigen::Index i) {
    return w[i] * std::pow(v.row(i).norm(), k);
  });
}

/// Discrete L^p norm (sum |value|^p h^n)^{1/p}; p = infinity gives the
/// largest cell magnitude.
template <typename Scalar>
Scalar lp_norm(const DensityField<Scalar>& rho, Scalar p) {
  if (std::isinf(p) && p > 0) {
    return rho.values.size() == 0 ? Scalar(0) : rho.values.cwiseAbs().maxCoeff();
  }
  if (!(p >= 1)) throw std::invalid_argument("lp_norm: p must be >= 1");
  const Scalar peak = rho.values.size() == 0 ? Scalar(0) : rho.values.cwiseAbs().maxCoeff();
  if (peak == Scalar(0)) return 0;
  // Factor out the peak so large p does not overflow.
  Scalar s = 0;
  for (Eigen::Index c = 0; c < rho.values.size(); ++c) s += std::pow(std::abs(rho.values[c]) / peak, p);
  return peak * std::pow(s * rho.grid.cell_volume(), Scalar(1) / p);
}

template <typename Scalar = double>
struct UniquenessValue {
  Scalar value = 0;
  Scalar argmax_p = 0;
};

/// max over p in p_grid of ||rho||_p / p. A lower bound for the supremum
/// over all p >= 1.
template <typename Scalar>
UniquenessValue<Scalar> uniqueness_functional(const DensityField<Scalar>& rho, std::span<const Scalar> p_grid) {
  if (p_grid.empty()) throw std::invalid_argument("uniqueness_functional: empty p grid");
  UniquenessValue<Scalar> best{-std::numeric_limits<Scalar>::infinity(), p_grid.front()};
  for (const Scalar p : p_grid) {
    if (!(p >= 1)) throw std::invalid_argument("uniqueness_functional: p grid entries must be >= 1");
    const Scalar q = lp_norm(rho, p) / p;
    if (q > best.value) best = {q, p};
  }
  return best;
}

template <typename Scalar = double>
struct EnvelopeCheck {
  bool holds = true;
  Eigen::Index worst_cell = -1;
  /// min over cells of C(1 + ln_-|x - xi|) - rho(x); negative when violated.
  Scalar worst_margin = std::numeric_limits<Scalar>::infinity();
};

/// Cellwise test of rho(x) <= C (1 + ln_-|x - xi|) at cell centers.
template <typename Scalar, typename Derived>
EnvelopeCheck<Scalar> log_envelope_check(const DensityField<Scalar>& rho, const Eigen::MatrixBase<Derived>& xi,
                                         Scalar C) {
  if (!(C > 0)) throw std::invalid_argument("log_envelope_check: C must be positive");
  EnvelopeCheck<Scalar> out;
  for (Eigen::Index c = 0; c < rho.values.size(); ++c) {
    const Scalar r = (rho.grid.cell_center(c) - xi).norm();
    const Scalar margin = C * (Scalar(1) + log_minus(r)) - rho.values[c];
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_cell = c;
    }
  }
  out.holds = !(out.worst_margin < 0);
  return out;
}

/// Optimal constant in the interpolation bound
/// ||rho||_{(k+n)/n} <= C_k (omega_n F)^{k/(k+n)} M_k^{n/(k+n)}
/// obtained by minimizing F omega_n R^n + R^{-k} m over R.
inline double interpolation_constant(double k, int n) {
  const double nn = n;
  return (1 + nn / k) * std::pow(k / nn, nn / (nn + k));
}

/// Pointwise bound rho(x) <= min_R [F omega_n R^n + R^{-k} m_k(x)], evaluated
/// cellwise. The minimizer is R^{n+k} = k m / (n omega_n F).
template <typename Scalar>
DensityField<Scalar> pointwise_density_bound(Scalar f_inf_bound, const DensityField<Scalar>& moment_density, Scalar k) {
  if (!(k >= 1)) throw std::invalid_argument("pointwise_density_bound: k must be >= 1");
  if (!(f_inf_bound > 0)) throw std::invalid_argument("pointwise_density_bound: f_inf_bound must be positive");
  const int n = moment_density.dimension();
  const Scalar omega = GeometricConstants::for_dimension(n).omega_n;
  const Scalar a = omega * f_inf_bound;
  DensityField<Scalar> out(moment_density.grid);
  for (Eigen::Index c = 0; c < out.values.size(); ++c) {
    const Scalar m = moment_density.values[c];
    if (m <= 0) continue;
    const Scalar radius = std::pow(k * m / (Scalar(n) * a), Scalar(1) / (Scalar(n) + k));
    out.values[c] = a * std::pow(radius, Scalar(n)) + m * std::pow(radius, -k);
  }
  return out;
}

}  // namespace vpkit
