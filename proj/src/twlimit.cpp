#include "fredholm/twlimit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fredholm/errors.hpp"
#include "fredholm/growth.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/quadrature.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/specfun.hpp"
#include "fredholm/symbols.hpp"

namespace fredholm {
namespace {

constexpr double kMapScale = 3.0;

double nystrom(double x, int order) {
  const GaussRule g = gauss_legendre(order);
  std::vector<double> u(order), sw(order), ai(order), aip(order);
  for (int i = 0; i < order; ++i) {
    const double xi = g.nodes[i];
    u[i] = x - kMapScale * std::log((1.0 - xi) / 2.0);
    sw[i] = std::sqrt(g.weights[i] * kMapScale / (1.0 - xi));
    const AiryPair a = airy_ai_both(u[i]);
    ai[i] = a.ai;
    aip[i] = a.aip;
  }
  Eigen::MatrixXd M(order, order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) {
      double k;
      if (i == j || u[i] == u[j])
        k = aip[i] * aip[i] - u[i] * ai[i] * ai[i];
      else
        k = (ai[i] * aip[j] - aip[i] * ai[j]) / (u[i] - u[j]);
      M(i, j) = (i == j ? 1.0 : 0.0) - sw[i] * k * sw[j];
    }
  return M.partialPivLu().determinant();
}

// t with 2t + x t^{1/3} = n, by Newton from t = n / 2.
double center_t(double x, int n) {
  double t = std::max(0.5 * n, 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = std::cbrt(t);
    const double f = 2.0 * t + x * c - n;
    const double df = 2.0 + x / (3.0 * c * c);
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-14 * t) break;
  }
  return t;
}

double plancherel_det(double t, int n, double* delta) {
  const auto km = build_kernel(make_exponential(t), n, 0, 1e-14);
  const auto d = fredholm_det(km, 1.0);
  if (delta) *delta = d.stability_delta;
  return d.value;
}

}  // namespace

AiryDet airy_kernel_det(double x, int order, double tol) {
  if (order < 8) throw ArgumentError("airy_kernel_det: order must be >= 8");
  if (!std::isfinite(x)) throw ArgumentError("airy_kernel_det: x must be finite");
  AiryDet d;
  d.x = x;
  d.order = order;
  d.value = std::clamp(nystrom(x, order), 0.0, 1.0);
  d.convergence_delta = std::abs(d.value - std::clamp(nystrom(x, order / 2), 0.0, 1.0));
  if (tol > 0.0 && d.convergence_delta > tol)
    throw ConvergenceError("airy_kernel_det: order/2 vs order difference " +
                               num_str(d.convergence_delta) + " exceeds tolerance",
                           d.convergence_delta);
  return d;
}

double tracy_widom_f2(double x, int order) {
  if (order < 8) throw ArgumentError("tracy_widom_f2: order must be >= 8");
  return std::clamp(nystrom(x, order), 0.0, 1.0);
}

double tracy_widom_quantile(double p, int order) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("tracy_widom_quantile: p must lie in (0, 1)");
  double lo = -10.0, hi = 6.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tracy_widom_f2(mid, order) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<PlancherelScanRow> plancherel_limit_scan(double x, const std::vector<double>& t_list,
                                                     int threads) {
  std::vector<PlancherelScanRow> rows(t_list.size());
  const double f2 = tracy_widom_f2(x, 80);
  parallel_for(0, static_cast<int>(t_list.size()), [&](int i) {
    const double t = t_list[i];
    if (!(t > 0.0)) throw ArgumentError("plancherel_limit_scan: t must be > 0");
    auto& row = rows[i];
    row.t = t;
    row.n = static_cast<int>(std::lround(2.0 * t + x * std::cbrt(t)));
    row.t_centered = center_t(x, row.n);
    row.f2 = f2;
    row.det = plancherel_det(row.t_centered, row.n, &row.stability_delta);
    row.det_uncentered = plancherel_det(t, row.n, nullptr);
    row.deviation = std::abs(row.det - f2);
    row.deviation_uncentered = std::abs(row.det_uncentered - f2);
  }, threads);
  return rows;
}

double growth_det(double alpha, double r, int m, int h) {
  const int n = static_cast<int>(std::lround(alpha * m));
  return fredholm_det_value(build_kernel(make_growth_symbol(n, m, r), h), 1.0);
}

GrowthScan growth_limit_scan(double x, double alpha, double r, const std::vector<int>& m_list,
                             int threads) {
  if (m_list.empty()) throw ArgumentError("growth_limit_scan: empty m list");
  for (int m : m_list) make_growth_params(alpha, r, m, 0.0);
  GrowthScan scan;
  scan.f2_median = tracy_widom_quantile(0.5);
  const double c = time_constant(alpha, r);

  // Median of h -> det(I - K_h) at the largest m: det is nondecreasing in h.
  const int mfit = *std::max_element(m_list.begin(), m_list.end());
  scan.fit_m = mfit;
  const double m13 = std::cbrt(static_cast<double>(mfit));
  int h = static_cast<int>(std::floor(c * mfit));
  double dh = growth_det(alpha, r, mfit, h);
  while (dh > 0.5 && h > 0) dh = growth_det(alpha, r, mfit, --h);
  double dnext = growth_det(alpha, r, mfit, h + 1);
  while (dnext < 0.5) {
    ++h;
    dh = dnext;
    dnext = growth_det(alpha, r, mfit, h + 1);
  }
  const double frac = (0.5 - dh) / (dnext - dh);
  const double s_med = (h + frac - c * mfit) / m13;
  scan.sigma_g = s_med / scan.f2_median;
  if (!(scan.sigma_g > 0.0))
    throw ConvergenceError("growth_limit_scan: fitted scale is not positive");

  scan.rows.resize(m_list.size());
  parallel_for(0, static_cast<int>(m_list.size()), [&](int i) {
    const int m = m_list[i];
    const double mm13 = std::cbrt(static_cast<double>(m));
    auto& row = scan.rows[i];
    row.m = m;
    row.h = static_cast<int>(std::lround(c * m + x * mm13));
    row.x_effective = (row.h - c * m) / mm13;
    row.det = growth_det(alpha, r, m, row.h);
    row.f2 = tracy_widom_f2(row.x_effective / scan.sigma_g);
    row.deviation = std::abs(row.det - row.f2);
  }, threads);
  return scan;
}

}  // namespace fredholm
