#pragma once

#include "vpkit/ensemble.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace vpkit {

/// M_k = sum_i w_i |v_i|^k with Neumaier-compensated summation, so M_0
/// agrees with total_mass() to a few ulps at any particle count.
template <typename Scalar>
Scalar velocity_moment(const ParticleEnsemble<Scalar>& ensemble, Scalar k) {
  if (!(k >= 0)) throw std::invalid_argument("velocity_moment: k must be >= 0");
  const auto& v = ensemble.velocities();
  const auto& w = ensemble.weights();
  Scalar sum = 0, carry = 0;
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const Scalar term = k == Scalar(0) ? w[i] : w[i] * std::pow(v.row(i).norm(), k);
    const Scalar t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

/// Smallest C0 with M_k <= (C0 k)^{k/n} for every supplied k, i.e.
/// max_k M_k^{n/k} / k. Returns +infinity if any moment is not finite.
inline double moment_growth_check(const std::map<double, double>& moments, int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("moment_growth_check: dimension must be 2 or 3");
  double c0 = 0;
  for (const auto& [k, mk] : moments) {
    if (!(k >= 1)) throw std::invalid_argument("moment_growth_check: moments must have k >= 1");
    if (!std::isfinite(mk)) return std::numeric_limits<double>::infinity();
    if (mk < 0) throw std::invalid_argument("moment_growth_check: negative moment");
    // log form avoids overflow of M_k^{n/k} for huge moments
    const double value = mk == 0 ? 0.0 : std::exp(double(n) / k * std::log(mk)) / k;
    if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();
    c0 = std::max(c0, value);
  }
  return c0;
}

}  // namespace vpkit
