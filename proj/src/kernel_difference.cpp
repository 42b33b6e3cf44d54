#include "vpkit/kernel_difference.hpp"

#include "vpkit/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace vpkit {

namespace {

using Values = std::array<double, 4>;  // |diff| |g|, then the vector components

struct Cell {
  std::array<double, 3> lower;
  double width;
  double g;
  Values estimate;
  double error;
  bool operator<(const Cell& other) const { return error < other.error; }
};

class KernelDifferenceIntegrand {
 public:
  KernelDifferenceIntegrand(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int n, double softening, int order)
      : n_(n), eps2_(softening * softening), order_(order) {
    for (int d = 0; d < n; ++d) {
      x_[d] = x[d];
      y_[d] = y[d];
    }
    nodes_.resize(order);
    weights_.resize(order);
    gauss_legendre(order, nodes_.data(), weights_.data());
  }

  /// Tensor Gauss rule over one cube, times the constant density g.
  Values rule(const std::array<double, 3>& lower, double width, double g) const {
    Values acc{0, 0, 0, 0};
    const double half = 0.5 * width;
    const int m = order_;
    const int count = n_ == 2 ? m * m : m * m * m;
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      std::array<double, 3> z{0, 0, 0};
      double w = 1;
      for (int d = 0; d < n_; ++d) {
        const int k = rem % m;
        rem /= m;
        z[d] = lower[d] + half * (1 + nodes_[k]);
        w *= weights_[k];
      }
      std::array<double, 3> diff{0, 0, 0};
      if (!kernel(x_, z, diff, +1) || !kernel(y_, z, diff, -1)) continue;
      double norm2 = 0;
      for (int d = 0; d < n_; ++d) norm2 += diff[d] * diff[d];
      acc[0] += w * std::sqrt(norm2);
      for (int d = 0; d < n_; ++d) acc[1 + d] += w * diff[d];
    }
    const double scale = std::pow(half, n_);
    acc[0] *= scale * std::abs(g);
    for (int d = 0; d < n_; ++d) acc[1 + d] *= scale * g;
    return acc;
  }

  Values children(const std::array<double, 3>& lower, double width, double g) const {
    Values acc{0, 0, 0, 0};
    const double half = 0.5 * width;
    const int count = 1 << n_;
    for (int c = 0; c < count; ++c) {
      std::array<double, 3> sub = lower;
      for (int d = 0; d < n_; ++d) {
        if (c & (1 << d)) sub[d] += half;
      }
      const Values r = rule(sub, half, g);
      for (int i = 0; i < 4; ++i) acc[i] += r[i];
    }
    return acc;
  }

  Cell make_cell(const std::array<double, 3>& lower, double width, double g) const {
    Cell cell{lower, width, g, {}, 0};
    const Values own = rule(lower, width, g);
    cell.estimate = children(lower, width, g);
    for (int i = 0; i <= n_; ++i) cell.error = std::max(cell.error, std::abs(cell.estimate[i] - own[i]));
    return cell;
  }

  int dimension() const { return n_; }

 private:
  // Adds sign * K(a - z) into out; false at an unsoftened singular node.
  bool kernel(const std::array<double, 3>& a, const std::array<double, 3>& z, std::array<double, 3>& out,
              double sign) const {
    std::array<double, 3> u{0, 0, 0};
    double r2 = eps2_;
    for (int d = 0; d < n_; ++d) {
      u[d] = a[d] - z[d];
      r2 += u[d] * u[d];
    }
    if (r2 == 0) return false;
    const double s = sign * (n_ == 2 ? 1.0 / r2 : 1.0 / (r2 * std::sqrt(r2)));
    for (int d = 0; d < n_; ++d) out[d] += s * u[d];
    return true;
  }

  int n_;
  double eps2_;
  int order_;
  std::array<double, 3> x_{0, 0, 0};
  std::array<double, 3> y_{0, 0, 0};
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace

KernelDifferenceResult kernel_difference_integral(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                  const DensityField<double>& g, const KernelSpec<double>& spec,
                                                  const CubatureOptions& options) {
  const int n = g.dimension();
  spec.validate();
  if (spec.n != n) throw std::invalid_argument("kernel_difference_integral: kernel and density dimension differ");
  if (x.size() != n || y.size() != n) throw std::invalid_argument("kernel_difference_integral: point dimension");
  KernelDifferenceResult result;
  result.field_difference = Eigen::VectorXd::Zero(n);
  if (x == y) return result;
  if ((g.values.array() < 0).any()) throw std::invalid_argument("kernel_difference_integral: density must be >= 0");

  const KernelDifferenceIntegrand integrand(x, y, n, spec.softening, options.order);
  std::priority_queue<Cell> heap;
  double error = 0;
  const double h = g.grid.h;
  for (Eigen::Index c = 0; c < g.values.size(); ++c) {
    if (g.values[c] == 0) continue;
    const Eigen::VectorXd lo = g.grid.cell_lower(c);
    std::array<double, 3> lower{0, 0, 0};
    for (int d = 0; d < n; ++d) lower[d] = lo[d];
    Cell cell = integrand.make_cell(lower, h, g.values[c]);
    error += cell.error;
    heap.push(cell);
  }

  std::vector<Cell> frozen;
  const double min_width = h * 1e-14;
  const int children = 1 << n;
  while (error > options.abs_tol && !heap.empty()) {
    if (heap.size() + frozen.size() + children > options.max_cells) {
      throw QuadratureError("kernel_difference_integral: cell budget exhausted", error);
    }
    const Cell worst = heap.top();
    heap.pop();
    const double half = 0.5 * worst.width;
    if (half < min_width) {
      frozen.push_back(worst);
      continue;
    }
    error -= worst.error;
    for (int c = 0; c < children; ++c) {
      std::array<double, 3> sub = worst.lower;
      for (int d = 0; d < n; ++d) {
        if (c & (1 << d)) sub[d] += half;
      }
      Cell child = integrand.make_cell(sub, half, worst.g);
      error += child.error;
      heap.push(child);
    }
    // frozen cells still carry their error
    if (!frozen.empty() && error <= options.abs_tol) break;
  }

  Values total{0, 0, 0, 0};
  double total_error = 0;
  auto absorb = [&](const Cell& cell) {
    for (int i = 0; i < 4; ++i) total[i] += cell.estimate[i];
    total_error += cell.error;
  };
  for (const auto& cell : frozen) absorb(cell);
  result.cells = heap.size() + frozen.size();
  while (!heap.empty()) {
    absorb(heap.top());
    heap.pop();
  }
  if (total_error > options.abs_tol) {
    throw QuadratureError("kernel_difference_integral: tolerance not reached", total_error);
  }
  result.integral = total[0];
  for (int d = 0; d < n; ++d) result.field_difference[d] = total[1 + d];
  result.error_estimate = total_error;
  return result;
}

std::vector<HolderProbe> default_holder_probes(int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("default_holder_probes: dimension must be 2 or 3");
  auto vec = [n](double a, double b, double c) {
    Eigen::VectorXd v(n);
    v[0] = a;
    v[1] = b;
    if (n == 3) v[2] = c;
    return v;
  };
  const double angle = 0.3;
  Eigen::VectorXd dir = vec(std::cos(angle), std::sin(angle), 0.0);
  dir.normalize();
  return {
      {"origin", vec(0, 0, 0), dir},
      {"interior", vec(0.35, 0.2, 0.1), dir},
      {"offaxis", vec(-0.45, 0.5, -0.15), vec(0, 1, 0)},
  };
}

std::vector<HolderScanRow> holder_ratio_scan(const DensityField<double>& g, const std::vector<double>& p_grid,
                                             const std::vector<double>& separations, const KernelSpec<double>& spec,
                                             const std::vector<HolderProbe>& probes, const CubatureOptions& options) {
  const int n = g.dimension();
  for (const double p : p_grid) {
    if (!(p > n)) throw std::invalid_argument("holder_ratio_scan: every p must exceed the dimension");
  }
  for (const double d : separations) {
    if (!(d > 0 && d < 1)) throw std::invalid_argument("holder_ratio_scan: separations must lie in (0, 1)");
  }
  const auto& probe_set = probes.empty() ? default_holder_probes(n) : probes;
  const double norm1 = lp_norm(g, 1.0);
  std::vector<double> normp;
  for (const double p : p_grid) normp.push_back(lp_norm(g, p));

  std::vector<HolderScanRow> rows;
  for (const auto& probe : probe_set) {
    for (const double d : separations) {
      const Eigen::VectorXd x = probe.center + 0.5 * d * probe.direction;
      const Eigen::VectorXd y = probe.center - 0.5 * d * probe.direction;
      const auto r = kernel_difference_integral(x, y, g, spec, options);
      const double field = r.field_difference.norm();
      for (std::size_t i = 0; i < p_grid.size(); ++i) {
        const double p = p_grid[i];
        HolderScanRow row;
        row.p = p;
        row.d = d;
        row.probe_id = probe.id;
        row.integral = r.integral;
        row.bound = p * (normp[i] + norm1) * std::pow(d, 1.0 - n / p);
        row.ratio = r.integral / row.bound;
        row.field_difference = field;
        row.field_ratio = field / row.bound;
        row.error_estimate = r.error_estimate;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_holder_csv(std::ostream& out, const std::vector<HolderScanRow>& rows) {
  out << "p,d,probe_id,integral,bound,ratio,field_difference,field_ratio,error_estimate\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.p << ',' << r.d << ',' << r.probe_id << ',' << r.integral << ',' << r.bound << ',' << r.ratio << ','
        << r.field_difference << ',' << r.field_ratio << ',' << r.error_estimate << '\n';
  }
}

}  // namespace vpkit
