#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace vpkit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// N x n array of points, one point per row. Column-major, so each
/// coordinate is contiguous in memory.
template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using PointsRef = Eigen::Ref<const PointMatrix<Scalar>>;

/// Interaction kernel x / (|x|^2 + eps^2)^{n/2} with sign gamma.
template <typename Scalar = double>
struct KernelSpec {
  int n = 2;
  int gamma = 1;
  Scalar softening = 0;

  void validate() const {
    if (n != 2 && n != 3) {
      throw std::invalid_argument("KernelSpec: dimension must be 2 or 3, got " + std::to_string(n));
    }
    if (gamma != 1 && gamma != -1) {
      throw std::invalid_argument("KernelSpec: gamma must be +1 or -1");
    }
    if (!(softening >= 0)) {
      throw std::invalid_argument("KernelSpec: softening must be >= 0");
    }
  }
};

struct GeometricConstants {
  double omega_n = 0;  // volume of the unit ball
  double sigma_n = 0;  // surface measure of the unit sphere

  static GeometricConstants for_dimension(int n) {
    constexpr double pi = std::numbers::pi;
    switch (n) {
      case 2: return {pi, 2 * pi};
      case 3: return {4 * pi / 3, 4 * pi};
      default: throw std::invalid_argument("GeometricConstants: dimension must be 2 or 3");
    }
  }
};

namespace detail {

// r2^{-n/2} for n = 2, 3
template <int Dim, typename Scalar>
inline Scalar inverse_power(Scalar r2) {
  if constexpr (Dim == 2) {
    return Scalar(1) / r2;
  } else {
    return Scalar(1) / (r2 * std::sqrt(r2));
  }
}

template <int Dim, typename Scalar>
void accumulate_field(const PointsRef<Scalar>& targets, const PointsRef<Scalar>& sources,
                      const Eigen::Ref<const VectorX<Scalar>>& weights, Scalar eps2, bool skip_same_index,
                      PointMatrix<Scalar>& out) {
  const Eigen::Index m = targets.rows();
  const Eigen::Index count = sources.rows();
  const Scalar* sx = sources.col(0).data();
  const Scalar* sy = sources.col(1).data();
  const Scalar* sz = Dim == 3 ? sources.col(2).data() : nullptr;
  const Scalar* w = weights.data();

  // Each target is an independent, fixed-order sum, so the result does not
  // depend on how targets are scheduled.
#if defined(VPKIT_HAVE_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar tx = targets(i, 0);
    const Scalar ty = targets(i, 1);
    const Scalar tz = Dim == 3 ? targets(i, 2) : Scalar(0);
    Scalar ex = 0, ey = 0, ez = 0;
    auto range = [&](Eigen::Index begin, Eigen::Index end) {
      for (Eigen::Index j = begin; j < end; ++j) {
        const Scalar dx = tx - sx[j];
        const Scalar dy = ty - sy[j];
        Scalar r2 = dx * dx + dy * dy + eps2;
        Scalar dz = 0;
        if constexpr (Dim == 3) {
          dz = tz - sz[j];
          r2 += dz * dz;
        }
        const Scalar s = w[j] * inverse_power<Dim>(r2);
        ex += s * dx;
        ey += s * dy;
        if constexpr (Dim == 3) ez += s * dz;
      }
    };
    if (skip_same_index) {
      range(0, std::min(i, count));
      range(std::min(i + 1, count), count);
    } else {
      range(0, count);
    }
    out(i, 0) = ex;
    out(i, 1) = ey;
    if constexpr (Dim == 3) out(i, 2) = ez;
  }
}

template <typename Scalar>
void check_no_coincidence(const PointsRef<Scalar>& targets, const PointsRef<Scalar>& sources,
                          bool skip_same_index) {
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    for (Eigen::Index j = 0; j < sources.rows(); ++j) {
      if (skip_same_index && i == j) continue;
      if ((targets.row(i) - sources.row(j)).squaredNorm() == Scalar(0)) {
        throw std::domain_error("field_at: target " + std::to_string(i) + " coincides with source " +
                                std::to_string(j) + " and softening is zero");
      }
    }
  }
}

}  // namespace detail

/// Kernel value x / (|x|^2 + eps^2)^{n/2}. Throws std::domain_error at the
/// origin of an unsoftened kernel.
template <typename Derived>
VectorX<typename Derived::Scalar> riesz_kernel(const Eigen::MatrixBase<Derived>& x,
                                                const KernelSpec<typename Derived::Scalar>& spec) {
  using Scalar = typename Derived::Scalar;
  spec.validate();
  if (x.size() != spec.n) {
    throw std::invalid_argument("riesz_kernel: vector size does not match kernel dimension");
  }
  const Scalar r2 = x.squaredNorm() + spec.softening * spec.softening;
  if (r2 == Scalar(0)) {
    throw std::domain_error("riesz_kernel: kernel is singular at x = 0 without softening");
  }
  const Scalar scale = spec.n == 2 ? detail::inverse_power<2>(r2) : detail::inverse_power<3>(r2);
  return x * scale;
}

/// Non-owning view of weighted point sources: positions (N x n) and
/// nonnegative weights.
template <typename Scalar = double>
struct WeightedPoints {
  PointsRef<Scalar> positions;
  Eigen::Ref<const VectorX<Scalar>> weights;
};

/// E(x) = gamma * sum_j w_j K(x - y_j) at every target row.
template <typename Scalar>
PointMatrix<Scalar> field_at(const std::type_identity_t<PointsRef<Scalar>>& targets, const WeightedPoints<Scalar>& sources,
                             const KernelSpec<Scalar>& spec) {
  spec.validate();
  const int n = spec.n;
  if (targets.rows() > 0 && targets.cols() != n) {
    throw std::invalid_argument("field_at: target dimension mismatch");
  }
  if (sources.positions.rows() != sources.weights.size()) {
    throw std::invalid_argument("field_at: source positions and weights differ in length");
  }
  if (sources.positions.rows() > 0 && sources.positions.cols() != n) {
    throw std::invalid_argument("field_at: source dimension mismatch");
  }
  if ((sources.weights.array() < Scalar(0)).any()) {
    throw std::invalid_argument("field_at: source weights must be nonnegative");
  }
  PointMatrix<Scalar> out = PointMatrix<Scalar>::Zero(targets.rows(), n);
  if (sources.positions.rows() == 0 || targets.rows() == 0) return out;
  if (spec.softening == Scalar(0)) detail::check_no_coincidence(targets, sources.positions, false);
  const Scalar eps2 = spec.softening * spec.softening;
  if (n == 2) {
    detail::accumulate_field<2>(targets, sources.positions, sources.weights, eps2, false, out);
  } else {
    detail::accumulate_field<3>(targets, sources.positions, sources.weights, eps2, false, out);
  }
  if (spec.gamma < 0) out = -out;
  return out;
}

/// Field of a point cloud on itself; the i-th source does not act on the
/// i-th target.
template <typename Scalar>
PointMatrix<Scalar> self_field(const WeightedPoints<Scalar>& sources, const KernelSpec<Scalar>& spec) {
  spec.validate();
  const PointsRef<Scalar>& pos = sources.positions;
  if (pos.rows() != sources.weights.size()) {
    throw std::invalid_argument("self_field: positions and weights differ in length");
  }
  PointMatrix<Scalar> out = PointMatrix<Scalar>::Zero(pos.rows(), spec.n);
  if (pos.rows() == 0) return out;
  if (pos.cols() != spec.n) throw std::invalid_argument("self_field: dimension mismatch");
  if (spec.softening == Scalar(0)) detail::check_no_coincidence(pos, pos, true);
  const Scalar eps2 = spec.softening * spec.softening;
  if (spec.n == 2) {
    detail::accumulate_field<2>(pos, pos, sources.weights, eps2, true, out);
  } else {
    detail::accumulate_field<3>(pos, pos, sources.weights, eps2, true, out);
  }
  if (spec.gamma < 0) out = -out;
  return out;
}

template <typename Scalar>
Scalar field_sup_norm(const std::type_identity_t<PointsRef<Scalar>>& targets, const WeightedPoints<Scalar>& sources,
                      const KernelSpec<Scalar>& spec) {
  if (targets.rows() == 0) throw std::invalid_argument("field_sup_norm: no targets");
  const PointMatrix<Scalar> e = field_at(targets, sources, spec);
  return e.rowwise().norm().maxCoeff();
}

/// ln_-(r) = max(0, -ln r).
template <typename Scalar>
Scalar log_minus(Scalar r) {
  return r >= Scalar(1) ? Scalar(0) : -std::log(r);
}

}  // namespace vpkit
