#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace vpkit {

struct QuadratureResult {
  double value = 0;
  double error = 0;
  std::size_t evaluations = 0;
};

/// Raised when an adaptive rule exhausts its budget above tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}
  double achieved_error() const { return achieved_error_; }

 private:
  double achieved_error_;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 20000;
};

/// Globally adaptive 15-point Gauss-Kronrod on [a, b]. Handles integrable
/// endpoint singularities by bisection. Throws QuadratureError when the
/// interval budget runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

/// Integral over [a, inf) through the map x = a + t / (1 - t).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       const QuadratureOptions& options = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, double* nodes, double* weights);

}  // namespace vpkit
