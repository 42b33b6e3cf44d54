#pragma once

#include "vpkit/ensemble.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace vpkit::testing {

inline constexpr double pi = std::numbers::pi;

inline bool close(double a, double b, double rel, double abs = 0) {
  return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

/// Midpoint rule for rho = 1 on the unit disk: cell centers inside B(0,1)
/// of a square grid with `cells` cells per axis, weighted by the cell area.
struct PointCloud {
  PointMatrix<double> positions;
  Eigen::VectorXd weights;
};

inline PointCloud unit_disk_quadrature(int cells) {
  const double h = 2.0 / cells;
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Eigen::Vector2d c(-1 + (i + 0.5) * h, -1 + (j + 0.5) * h);
      if (c.norm() <= 1) pts.push_back(c);
    }
  }
  PointCloud out{PointMatrix<double>(pts.size(), 2), Eigen::VectorXd::Constant(pts.size(), h * h)};
  for (std::size_t i = 0; i < pts.size(); ++i) out.positions.row(i) = pts[i].transpose();
  return out;
}

inline Ensemble ensemble_from(int n, const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& v,
                              const std::vector<double>& w, double f_inf = 1) {
  const auto count = static_cast<Eigen::Index>(w.size());
  PointMatrix<double> X(count, n), V(count, n);
  Eigen::VectorXd W(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int d = 0; d < n; ++d) {
      X(i, d) = x[i][d];
      V(i, d) = v[i][d];
    }
    W[i] = w[i];
  }
  return Ensemble(n, X, V, W, f_inf);
}

}  // namespace vpkit::testing
