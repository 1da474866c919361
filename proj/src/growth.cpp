#include "fredholm/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/quadrature.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/symbols.hpp"

namespace fredholm {
namespace {

using cd = std::complex<double>;
using cld = std::complex<long double>;

double segment_point_distance(cd a, cd b, cd p) {
  const cd d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

}  // namespace

double time_constant(double alpha, double r) {
  if (!(alpha > 0.0)) throw ArgumentError("time_constant: alpha must be > 0");
  if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("time_constant: r must lie in [0, 1)");
  return ((1.0 - alpha) * r + 2.0 * std::sqrt(alpha * r)) / (1.0 + r);
}

GrowthParams make_growth_params(double alpha, double r, int m, double s) {
  if (!(alpha > 0.0)) throw ArgumentError("growth: alpha must be > 0");
  if (!(r > 0.0 && r < 1.0)) throw ArgumentError("growth: r must lie in (0, 1)");
  if (!(alpha * r < 1.0)) throw ArgumentError("growth: alpha * r must be < 1");
  if (m < 1) throw ArgumentError("growth: m must be >= 1");
  if (!(s >= 0.0)) throw ArgumentError("growth: s must be >= 0");
  const double am = alpha * m;
  const double rn = std::round(am);
  if (std::abs(am - rn) > 1e-9 * std::max(1.0, am) || rn < 1.0)
    throw ArgumentError("growth: alpha * m must be a positive integer");
  GrowthParams gp;
  gp.alpha = alpha;
  gp.r = r;
  gp.m = m;
  gp.s = s;
  gp.n = static_cast<int>(rn);
  gp.c = time_constant(alpha, r);
  gp.c_prime_nominal = gp.c - s * std::pow(static_cast<double>(m), -2.0 / 3.0);
  if (!(gp.c_prime_nominal > 0.0))
    throw RegimeError("growth: c' = c - s m^{-2/3} must be > 0");
  gp.h = static_cast<int>(std::floor(gp.c_prime_nominal * m + 1e-9));
  gp.c_prime = static_cast<double>(gp.h) / m;
  return gp;
}

CriticalPoints critical_points(double alpha, double r, double c_prime) {
  const double a = alpha + c_prime;
  if (a == 0.0) throw ArgumentError("critical_points: alpha + c' vanishes");
  const double b = (1.0 - r) * c_prime + (1.0 - alpha) * r;
  const double lin = (1.0 + r) * c_prime + (alpha - 1.0) * r;
  double disc = lin * lin - 4.0 * alpha * r;
  CriticalPoints cp;
  cp.discriminant = disc;
  if (disc > 1e-12 * std::max(1.0, 4.0 * alpha * r))
    throw RegimeError("critical_points: two real critical points (discriminant " +
                      num_str(disc) + " > 0) are outside the supported regime");
  disc = std::min(disc, 0.0);
  const double im = std::sqrt(-disc) / (2.0 * a);
  const double re = -b / (2.0 * a);
  cp.u_plus = cd(re, im);
  cp.u_minus = cd(re, -im);
  return cp;
}

std::complex<double> sigma(std::complex<double> z, double alpha, double r, double c_prime) {
  if (z.imag() == 0.0 && (z.real() <= -1.0 || z.real() >= 0.0))
    throw ArgumentError("sigma: z lies on the cut set (-inf, -1] U [0, inf)");
  const cd z0(-0.5, 0.0);
  double dist = std::numeric_limits<double>::infinity();
  for (cd p : {cd(-1.0, 0.0), cd(0.0, 0.0), cd(r, 0.0)})
    dist = std::min(dist, segment_point_distance(z0, z, p));
  if (dist == 0.0) throw ArgumentError("sigma: singular point");
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(z - z0) / (0.2 * dist))));
  cd value = alpha * std::log(0.5) + std::log(r + 0.5) + (c_prime - 1.0) * std::log(0.5);
  cd prev = z0;
  for (int k = 1; k <= steps; ++k) {
    const cd cur = z0 + (z - z0) * (static_cast<double>(k) / steps);
    value += alpha * std::log((1.0 + cur) / (1.0 + prev)) + std::log((r - cur) / (r - prev)) +
             (c_prime - 1.0) * std::log(cur / prev);
    prev = cur;
  }
  return value;
}

std::complex<double> sigma_prime(std::complex<double> z, double alpha, double r, double c_prime) {
  return alpha / (1.0 + z) - 1.0 / (r - z) + (c_prime - 1.0) / z;
}

std::complex<double> sigma_second(std::complex<double> z, double alpha, double r, double c_prime) {
  return -alpha / ((1.0 + z) * (1.0 + z)) - 1.0 / ((r - z) * (r - z)) -
         (c_prime - 1.0) / (z * z);
}

LeadingTrace leading_trace_at(double alpha, double r, int m, double c_prime) {
  const double c = time_constant(alpha, r);
  LeadingTrace lt;
  if (c_prime >= c) return lt;
  critical_points(alpha, r, c_prime);  // regime check at the lower end
  const auto q = integrate_endpoint_singular(
      [&](double g) {
        const auto cp = critical_points(alpha, r, std::min(g, c));
        return std::abs(std::arg(-cp.u_plus));
      },
      c_prime, c, 1e-13);
  lt.value = m / std::numbers::pi * q.value;
  lt.quadrature_error = m / std::numbers::pi * q.error_estimate;
  const auto cp = critical_points(alpha, r, c_prime);
  const cd diff = sigma(cp.u_plus, alpha, r, c_prime) - sigma(cp.u_minus, alpha, r, c_prime);
  lt.endpoint_value = m / (2.0 * std::numbers::pi) * diff.imag();
  lt.relative_difference =
      lt.value != 0.0 ? std::abs(lt.value - lt.endpoint_value) / std::abs(lt.value) : 0.0;
  return lt;
}

LeadingTrace leading_trace(const GrowthParams& gp) {
  return leading_trace_at(gp.alpha, gp.r, gp.m, gp.c_prime);
}

namespace {

cld log_psi(cld z, int n, int m, double r, int h) {
  const long double rl = r;
  return static_cast<long double>(n) * std::log(1.0L + z) +
         static_cast<long double>(m) * std::log(1.0L - rl / z) +
         static_cast<long double>(h) * std::log(z);
}

// Spread of log|psi| that the double sum has to cancel for given radii.
long double cancellation(int n, int m, double r, int h, long double rho1, long double rho2) {
  constexpr int kSamples = 256;
  long double max2 = -INFINITY, min1 = INFINITY;
  for (int j = 0; j < kSamples; ++j) {
    const long double th = 2.0L * std::numbers::pi_v<long double> * j / kSamples;
    max2 = std::max(max2, log_psi(std::polar(rho2, th), n, m, r, h).real());
    min1 = std::min(min1, log_psi(std::polar(rho1, th), n, m, r, h).real());
  }
  return max2 - min1;
}

long double trapezoid(int n, int m, double r, int h, long double rho1, long double rho2, int N,
                      long double& imag, long double& floor) {
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  std::vector<cld> L1(N), L2(N);
  long double s1 = INFINITY, s2 = -INFINITY;
  for (int j = 0; j < N; ++j) {
    const long double th = two_pi * j / N;
    L1[j] = log_psi(std::polar(rho1, th), n, m, r, h);
    L2[j] = log_psi(std::polar(rho2, th), n, m, r, h);
    s1 = std::min(s1, L1[j].real());
    s2 = std::max(s2, L2[j].real());
  }
  std::vector<cld> A(N), B(N), kern(N);
  for (int j = 0; j < N; ++j) {
    A[j] = std::exp(L2[j] - s2);
    B[j] = std::exp(s1 - L1[j]);
    // z1 z2 / (z1 - z2)^2 = w / (1 - w)^2 with w = z2 / z1.
    const cld w = std::polar(rho2 / rho1, two_pi * j / N);
    kern[j] = w / ((1.0L - w) * (1.0L - w));
  }
  cld total = 0.0L;
  for (int j1 = 0; j1 < N; ++j1) {
    cld inner = 0.0L;
    for (int j2 = 0; j2 < N; ++j2) {
      int d = j2 - j1;
      if (d < 0) d += N;
      inner += A[j2] * kern[d];
    }
    total += B[j1] * inner;
  }
  total *= std::exp(s2 - s1) / (static_cast<long double>(N) * N);
  imag = total.imag();
  // Rounding floor: every summand is bounded by the peak kernel value.
  const long double kmax = rho1 * rho2 / ((rho1 - rho2) * (rho1 - rho2));
  floor = 64.0L * std::numeric_limits<long double>::epsilon() * std::exp(s2 - s1) * kmax;
  return total.real();
}

}  // namespace

ContourTrace trace_contour(int n, int m, double r, int h, double rel_tol) {
  if (n < 1 || m < 1) throw ArgumentError("trace_contour: n and m must be >= 1");
  if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("trace_contour: r must lie in [0, 1)");
  ContourTrace ct;
  if (r == 0.0) return ct;
  // 1/psi(z1) has its pole at z = r, so r < rho1 < 1; psi(z2) is analytic in
  // 0 < |z| < 1, so any rho2 < rho1 works. Pick the pair with least cancellation.
  long double best = INFINITY, b1 = 0, b2 = 0;
  for (int i = 1; i < 20; ++i) {
    const long double rho1 = r + (1.0L - r) * i / 20.0L;
    for (int j = 2; j <= 18; ++j) {
      const long double rho2 = rho1 * j / 20.0L;
      const long double c = cancellation(n, m, r, h, rho1, rho2);
      if (c < best) {
        best = c;
        b1 = rho1;
        b2 = rho2;
      }
    }
  }
  ct.rho1 = static_cast<double>(b1);
  ct.rho2 = static_cast<double>(b2);
  int N = 64;
  while (N < 2 * (n + std::abs(h) + m) + 64) N *= 2;
  long double im = 0.0L, floor = 0.0L;
  long double prev = trapezoid(n, m, r, h, b1, b2, N, im, floor);
  for (;;) {
    N *= 2;
    const long double cur = trapezoid(n, m, r, h, b1, b2, N, im, floor);
    const long double delta = std::abs(cur - prev);
    ct.value = static_cast<double>(cur);
    ct.imag_residue = static_cast<double>(im);
    ct.nodes = N;
    ct.refinement_delta = static_cast<double>(delta);
    if (delta <= rel_tol * std::abs(cur) || delta < 1e-15L || delta <= floor) return ct;
    if (N >= 16384)
      throw ConvergenceError("trace_contour: node doubling stalled at relative change " +
                                 num_str(static_cast<double>(delta / std::abs(cur))),
                             static_cast<double>(delta));
    prev = cur;
  }
}

ContourTrace trace_contour(const GrowthParams& gp, double rel_tol) {
  return trace_contour(gp.n, gp.m, gp.r, gp.h, rel_tol);
}

Lemma3Result lemma3_experiment(double alpha, double r, const std::vector<int>& m_list,
                               const std::vector<double>& s_list, int contour_max_m,
                               int threads) {
  Lemma3Result res;
  std::vector<GrowthParams> params;
  for (int m : m_list)
    for (double s : s_list) params.push_back(make_growth_params(alpha, r, m, s));
  res.rows.resize(params.size());
  parallel_for(0, static_cast<int>(params.size()), [&](int i) {
    const auto& gp = params[i];
    Lemma3Row& row = res.rows[i];
    row.m = gp.m;
    row.s = gp.s;
    row.h = gp.h;
    row.c_prime = gp.c_prime;
    row.s_effective = (gp.c * gp.m - gp.h) / std::cbrt(static_cast<double>(gp.m));
    const auto km = build_kernel(make_growth_symbol(gp.n, gp.m, gp.r), gp.h);
    row.trace_matrix = trace(km);
    row.trace_contour = gp.m <= contour_max_m ? trace_contour(gp).value
                                              : std::numeric_limits<double>::quiet_NaN();
    row.leading = leading_trace(gp).value;
    row.det = fredholm_det_value(km, 1.0);
    row.exp_minus_trace = std::exp(-row.trace_matrix);
    try {
      row.lemma1_holds = lemma1_check(km, 1.0).holds;
    } catch (const PreconditionError&) {
      row.lemma1_holds = false;
    }
  }, threads);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    res.lemma1_all = res.lemma1_all && res.rows[i].lemma1_holds;
    if (i > 0 && res.rows[i].m == res.rows[i - 1].m && res.rows[i].s > res.rows[i - 1].s &&
        res.rows[i].det > res.rows[i - 1].det + 1e-12)
      res.det_monotone = false;
  }
  return res;
}

}  // namespace fredholm
