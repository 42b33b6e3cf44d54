#pragma once

#include "vpkit/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vpkit {

/// Weighted phase-space point cloud. Each particle carries a fixed weight;
/// transporting particles along characteristics with weights untouched is
/// the pushforward of the initial density.
template <typename Scalar = double>
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;

  ParticleEnsemble(int n, PointMatrix<Scalar> positions, PointMatrix<Scalar> velocities, VectorX<Scalar> weights,
                   Scalar f_inf_bound = 0)
      : n_(n),
        positions_(std::move(positions)),
        velocities_(std::move(velocities)),
        weights_(std::move(weights)),
        f_inf_bound_(f_inf_bound) {
    if (n_ != 2 && n_ != 3) throw std::invalid_argument("ParticleEnsemble: dimension must be 2 or 3");
    const auto count = weights_.size();
    if (positions_.rows() != count || velocities_.rows() != count) {
      throw std::invalid_argument("ParticleEnsemble: positions, velocities and weights differ in length");
    }
    if (count > 0 && (positions_.cols() != n_ || velocities_.cols() != n_)) {
      throw std::invalid_argument("ParticleEnsemble: coordinate arrays must have n columns");
    }
    if (count == 0) {
      positions_.resize(0, n_);
      velocities_.resize(0, n_);
    }
    if ((weights_.array() < Scalar(0)).any() || !weights_.allFinite()) {
      throw std::invalid_argument("ParticleEnsemble: weights must be finite and nonnegative");
    }
    if (!(f_inf_bound_ >= 0)) throw std::invalid_argument("ParticleEnsemble: f_inf_bound must be >= 0");
  }

  static ParticleEnsemble empty(int n) {
    return ParticleEnsemble(n, PointMatrix<Scalar>(0, n), PointMatrix<Scalar>(0, n), VectorX<Scalar>(0));
  }

  int dimension() const { return n_; }
  Eigen::Index size() const { return weights_.size(); }

  const PointMatrix<Scalar>& positions() const { return positions_; }
  const PointMatrix<Scalar>& velocities() const { return velocities_; }
  PointMatrix<Scalar>& positions() { return positions_; }
  PointMatrix<Scalar>& velocities() { return velocities_; }
  const VectorX<Scalar>& weights() const { return weights_; }

  Scalar f_inf_bound() const { return f_inf_bound_; }

  /// Neumaier-compensated sum, so a million equal weights add up exactly
  /// to within a few ulps.
  Scalar total_mass() const {
    Scalar sum = 0, carry = 0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      const Scalar w = weights_[i];
      const Scalar t = sum + w;
      carry += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
      sum = t;
    }
    return sum + carry;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> momentum() const {
    VectorX<Scalar> p = VectorX<Scalar>::Zero(n_);
    for (Eigen::Index i = 0; i < size(); ++i) p += weights_[i] * velocities_.row(i).transpose();
    return p;
  }

  WeightedPoints<Scalar> as_sources() const { return {positions_, weights_}; }

 private:
  int n_ = 2;
  PointMatrix<Scalar> positions_;
  PointMatrix<Scalar> velocities_;
  VectorX<Scalar> weights_;
  Scalar f_inf_bound_ = 0;
};

using Ensemble = ParticleEnsemble<double>;

}  // namespace vpkit
