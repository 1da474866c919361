#pragma once

// Airy-kernel determinant F_2(x) = det(I - K_Ai) on L^2(x, inf) and the
// edge-scaling comparisons against discrete determinants.

#include <vector>

namespace fredholm {

struct AiryDet {
  double x = 0.0;
  int order = 0;
  double value = 0.0;
  /// |value(order) - value(order / 2)|.
  double convergence_delta = 0.0;
};

/// Gauss-Legendre Nystrom discretization after u = x - 3 ln((1 - xi) / 2).
/// Throws ArgumentError for order < 8; ConvergenceError when tol is positive
/// and the delta exceeds it.
AiryDet airy_kernel_det(double x, int order = 60, double tol = 0.0);

/// F_2 without the self-convergence companion.
double tracy_widom_f2(double x, int order = 60);

/// x with F_2(x) = p, by bisection on [-10, 6].
double tracy_widom_quantile(double p, int order = 60);

struct PlancherelScanRow {
  double t = 0.0;
  /// round(2t + x t^{1/3}).
  int n = 0;
  /// t* solving 2t* + x t*^{1/3} = n, so the edge variable equals x exactly.
  double t_centered = 0.0;
  double det = 0.0;
  double det_uncentered = 0.0;
  double f2 = 0.0;
  double deviation = 0.0;
  double deviation_uncentered = 0.0;
  double stability_delta = 0.0;
};

std::vector<PlancherelScanRow> plancherel_limit_scan(double x, const std::vector<double>& t_list,
                                                     int threads = 0);

struct GrowthScanRow {
  int m = 0;
  int h = 0;
  /// (h - c m) / m^{1/3}, the lattice value of the scan variable.
  double x_effective = 0.0;
  double det = 0.0;
  double f2 = 0.0;
  double deviation = 0.0;
};

struct GrowthScan {
  /// Fitted scale: det(I - K_h) ~ F_2(x / sigma_g) with x = (h - c m) / m^{1/3}.
  double sigma_g = 1.0;
  int fit_m = 0;
  double f2_median = 0.0;
  std::vector<GrowthScanRow> rows;
};

/// Fits sigma_g by matching the median of h -> det(I - K_h) at the largest m
/// (linear interpolation between lattice points), then compares at
/// h = round(c m + x m^{1/3}) for every m.
GrowthScan growth_limit_scan(double x, double alpha, double r, const std::vector<int>& m_list,
                             int threads = 0);

/// det(I - K_h) for the growth symbol with n = alpha m.
double growth_det(double alpha, double r, int m, int h);

}  // namespace fredholm
