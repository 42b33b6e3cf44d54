#pragma once

#include "vpkit/density.hpp"
#include "vpkit/geometry.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace vpkit {

struct CubatureOptions {
  double abs_tol = 1e-8;
  std::size_t max_cells = 4'000'000;
  /// Gauss-Legendre points per axis in each cell.
  int order = 3;
};

struct KernelDifferenceResult {
  /// integral of |K(x-z) - K(y-z)| |g(z)| dz
  double integral = 0;
  /// E[g](x) - E[g](y) with E[g] = K * g (no sign gamma)
  Eigen::VectorXd field_difference;
  double error_estimate = 0;
  std::size_t cells = 0;
};

/// Adaptive cubature of the kernel difference against a gridded density.
/// The grid cells seed the subdivision, so the integrand is smooth inside
/// every cell except at the singular points x and y; cells are refined
/// dyadically, worst error estimate first, until the summed estimate drops
/// below options.abs_tol. Throws QuadratureError otherwise.
KernelDifferenceResult kernel_difference_integral(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                  const DensityField<double>& g, const KernelSpec<double>& spec = {},
                                                  const CubatureOptions& options = {});

struct HolderProbe {
  std::string id;
  Eigen::VectorXd center;
  /// Unit vector along which the pair is separated.
  Eigen::VectorXd direction;
};

/// One pair straddling the origin plus two pairs in smooth regions.
std::vector<HolderProbe> default_holder_probes(int n);

struct HolderScanRow {
  double p = 0;
  double d = 0;
  std::string probe_id;
  double integral = 0;
  double bound = 0;  // p (||g||_p + ||g||_1) d^{1 - n/p}
  double ratio = 0;
  double field_difference = 0;  // |E[g](x) - E[g](y)|
  double field_ratio = 0;
  double error_estimate = 0;
};

/// Ratio table of the kernel-difference integral against
/// p (||g||_p + ||g||_1) |x - y|^{1 - n/p} for every (p, d, probe).
std::vector<HolderScanRow> holder_ratio_scan(const DensityField<double>& g, const std::vector<double>& p_grid,
                                             const std::vector<double>& separations, const KernelSpec<double>& spec,
                                             const std::vector<HolderProbe>& probes = {},
                                             const CubatureOptions& options = {});

/// CSV with columns p,d,probe_id,integral,bound,ratio followed by
/// field_difference,field_ratio,error_estimate.
void write_holder_csv(std::ostream& out, const std::vector<HolderScanRow>& rows);

}  // namespace vpkit
