#include "vpkit/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace vpkit {

namespace {

// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options) {
  if (a == b) return {};
  if (b < a) {
    auto r = integrate(f, b, a, options);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Segment> heap;
  std::vector<Segment> frozen;  // segments too narrow to split further
  Segment first = kronrod15(f, a, b);
  if (!std::isfinite(first.value)) {
    throw QuadratureError("integrate: non-finite integrand value", std::abs(first.value));
  }
  heap.push(first);
  double value = first.value;
  double error = first.error;
  std::size_t evaluations = 15;

  auto tolerance = [&] { return std::max(options.abs_tol, options.rel_tol * std::abs(value)); };

  while (error > tolerance() && !heap.empty()) {
    if (heap.size() + frozen.size() >= options.max_intervals) {
      throw QuadratureError("integrate: interval budget exhausted", error);
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const Segment left = kronrod15(f, worst.a, mid);
    const Segment right = kronrod15(f, mid, worst.b);
    evaluations += 30;
    if (!std::isfinite(left.value) || !std::isfinite(right.value)) {
      throw QuadratureError("integrate: non-finite integrand value", error);
    }
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Resum to shed the drift of the running totals.
  value = 0;
  error = 0;
  for (const auto& s : frozen) {
    value += s.value;
    error += s.error;
  }
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (error > tolerance()) {
    throw QuadratureError("integrate: tolerance not reached", error);
  }
  return {value, error, evaluations};
}

QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       const QuadratureOptions& options) {
  auto mapped = [&](double t) {
    const double s = 1.0 - t;
    const double x = a + t / s;
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx / (s * s);
  };
  return integrate(mapped, 0.0, 1.0, options);
}

void gauss_legendre(int order, double* nodes, double* weights) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1, p1 = x;
      dp = order * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1, p1 = x;
    for (int j = 2; j <= order; ++j) {
      const double p2 = ((2.0 * j - 1) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1);
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = w;
    weights[order - 1 - i] = w;
  }
  if (order == 1) {
    nodes[0] = 0;
    weights[0] = 2;
  }
}

}  // namespace vpkit
