#include "vpkit/initial_data.hpp"
#include "vpkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vpkit {

namespace {

// Inverse of r^n (1 - n ln r) on [0, 1] by bisection; the CDF is increasing.
double inverse_log_singular_cdf(int n, double u) {
  double lo = 0, hi = 1;
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_singular::radial_cdf(n, mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SampleResult sample_log_singular(const InitialDataSpec& spec, std::size_t count, std::uint64_t seed,
                                 const SampleOptions& options) {
  const int n = spec.n;
  PointMatrix<double> x(count, n), v(count, n);
  const std::size_t blocks = (count + options.block_size - 1) / options.block_size;
  for (std::size_t b = 0; b < blocks; ++b) {
    auto rng = substream(seed, b);
    const std::size_t end = std::min(count, (b + 1) * options.block_size);
    for (std::size_t i = b * options.block_size; i < end; ++i) {
      const double r = inverse_log_singular_cdf(n, uniform01(rng));
      const Eigen::VectorXd pos = r * random_direction(n, rng);
      // |v|^2 <= (ln_- r)^{2/n}; f0 is constant on that ball, so v is uniform in it.
      const double vmax = std::pow(log_minus(r), 1.0 / n);
      const Eigen::VectorXd vel = random_in_ball(n, vmax, rng);
      x.row(i) = pos.transpose();
      v.row(i) = vel.transpose();
    }
  }
  const double mass = *spec.exact_mass;
  SampleResult out;
  out.ensemble = Ensemble(n, std::move(x), std::move(v), Eigen::VectorXd::Constant(count, mass / double(count)),
                          spec.f_inf_bound);
  out.mass = out.ensemble.total_mass();
  out.mass_is_exact = true;
  out.acceptance = 1;
  out.proposals = count;
  return out;
}

// Uniform proposals x in B(0, R), v in B(0, V(x)). The proposal density is
// 1 / (|B(0,R)| |B(0,V(x))|), so f0 times that volume product is an
// unbiased weight once divided by the total number of proposals.
SampleResult sample_importance(const InitialDataSpec& spec, std::size_t count, std::uint64_t seed,
                               const SampleOptions& options) {
  const int n = spec.n;
  if (!spec.speed_bound) throw std::invalid_argument("sample: specification lacks a speed bound");
  const double omega = GeometricConstants::for_dimension(n).omega_n;
  const double R = spec.spatial_radius;
  const double spatial_volume = omega * std::pow(R, n);

  PointMatrix<double> x(count, n), v(count, n);
  Eigen::VectorXd raw(count);
  std::uint64_t proposals = 0;
  const std::size_t blocks = (count + options.block_size - 1) / options.block_size;
  for (std::size_t b = 0; b < blocks; ++b) {
    auto rng = substream(seed, b);
    const std::size_t begin = b * options.block_size;
    const std::size_t end = std::min(count, begin + options.block_size);
    std::uint64_t tries = 0;
    std::size_t accepted = 0;
    for (std::size_t i = begin; i < end;) {
      ++tries;
      if (tries >= 1000 && double(accepted) < options.acceptance_floor * double(tries)) {
        throw std::runtime_error("sample: acceptance rate " + std::to_string(double(accepted) / double(tries)) +
                                 " fell below the floor; the support bounds are too loose");
      }
      const Eigen::VectorXd pos = random_in_ball(n, R, rng);
      const double vmax = spec.speed_bound(pos);
      if (!(vmax > 0)) continue;
      const Eigen::VectorXd vel = random_in_ball(n, vmax, rng);
      const double f = spec.evaluate(pos, vel);
      if (!(f > 0)) continue;
      if (!std::isfinite(f)) throw std::runtime_error("sample: f0 is not finite at a proposal");
      x.row(i) = pos.transpose();
      v.row(i) = vel.transpose();
      raw[i] = f * spatial_volume * omega * std::pow(vmax, n);
      ++accepted;
      ++i;
    }
    proposals += tries;
  }
  SampleResult out;
  out.ensemble = Ensemble(n, std::move(x), std::move(v), raw / double(proposals), spec.f_inf_bound);
  out.mass = out.ensemble.total_mass();
  out.mass_is_exact = false;
  out.acceptance = double(count) / double(proposals);
  out.proposals = proposals;
  return out;
}

}  // namespace

SampleResult sample(const InitialDataSpec& spec, std::size_t count, std::uint64_t seed,
                    const SampleOptions& options) {
  if (count == 0) throw std::invalid_argument("sample: particle count must be positive");
  if (options.block_size == 0) throw std::invalid_argument("sample: block size must be positive");
  if (!(options.acceptance_floor > 0 && options.acceptance_floor < 1)) {
    throw std::invalid_argument("sample: acceptance floor must lie in (0, 1)");
  }
  if (spec.family == Family::log_singular && spec.exact_mass) return sample_log_singular(spec, count, seed, options);
  return sample_importance(spec, count, seed, options);
}

}  // namespace vpkit
