#include "fredholm/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {
namespace {

constexpr double kRescale = 1e250;
constexpr double kRescaleInv = 1e-250;

// Starting order for the backward recurrence: well past both the requested
// order and the turning point k = x, where the minimal solution has decayed
// by a factor exp(-(2/3) xi^{3/2}) with xi = (N - x) / (x/2)^{1/3}.
int miller_start(int kmax, double x) {
  const double edge = std::max<double>(kmax, std::ceil(x));
  const double layer = std::max(40.0, std::ceil(15.0 * std::cbrt(x / 2.0)));
  int n = static_cast<int>(edge + layer);
  if (n % 2 == 1) ++n;
  return n;
}

long double power_series_j(int k, double x) {
  const long double half = static_cast<long double>(x) / 2.0L;
  long double term = 1.0L;
  for (int i = 1; i <= k; ++i) term *= half / i;
  long double sum = term;
  const long double q = half * half;
  for (int j = 1; j < 400; ++j) {
    term *= -q / (static_cast<long double>(j) * (j + k));
    sum += term;
    if (j > half && std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

std::vector<double> bessel_j_sequence(int kmax, double x) {
  if (kmax < 0) throw ArgumentError("bessel_j_sequence: kmax must be >= 0");
  if (x < 0.0 || !std::isfinite(x))
    throw ArgumentError("bessel_j_sequence: x must be finite and >= 0");
  std::vector<double> out(kmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = miller_start(kmax, x);
  double next = 0.0;   // f_{k+1}
  double cur = 1e-30;  // f_k at k = start
  double norm = 0.0;   // f_0 + 2 * sum f_{2j}, in the current scale
  // Values already stored in `out` (indices k..kmax) share the current scale.
  for (int k = start; k >= 0; --k) {
    if (k <= kmax) out[k] = cur;
    if (k % 2 == 0) norm += (k == 0 ? 1.0 : 2.0) * cur;
    if (k == 0) break;
    const double prev = 2.0 * k / x * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > kRescale) {
      cur *= kRescaleInv;
      next *= kRescaleInv;
      norm *= kRescaleInv;
      for (int j = k; j <= kmax; ++j) out[j] *= kRescaleInv;
    }
  }
  for (double& v : out) v /= norm;
  return out;
}

BesselEval bessel_j_eval(int k, double x) {
  if (k < 0) throw ArgumentError("bessel_j: order must be >= 0");
  if (x < 0.0 || !std::isfinite(x))
    throw ArgumentError("bessel_j: argument must be finite and >= 0");
  BesselEval e;
  e.order = k;
  e.argument = x;
  if (x == 0.0) {
    e.value = k == 0 ? 1.0 : 0.0;
    e.method = BesselMethod::PowerSeries;
    return e;
  }
  if (x <= 12.0 && k <= 30) {
    e.value = static_cast<double>(power_series_j(k, x));
    e.method = BesselMethod::PowerSeries;
  } else {
    e.value = bessel_j_sequence(k, x)[k];
    e.method = BesselMethod::MillerRecurrence;
  }
  e.underflow = (e.value == 0.0 && k > 0);
  return e;
}

// ---------------------------------------------------------------------------
// Airy function

namespace {

constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kAip0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)

AiryPair airy_maclaurin(double xd) {
  const long double x = xd;
  const long double x3 = x * x * x;
  long double f = 1.0L, tf = 1.0L;
  long double g = x, tg = x;
  long double fp = 0.0L, tfp = x * x / 2.0L;
  long double gp = 1.0L, tgp = 1.0L;
  fp = tfp;
  for (int k = 0; k < 200; ++k) {
    const long double a = 3.0L * k;
    tf *= x3 / ((a + 2) * (a + 3));
    tg *= x3 / ((a + 3) * (a + 4));
    tfp *= x3 / ((a + 3) * (a + 5));
    tgp *= x3 / ((a + 1) * (a + 3));
    f += tf;
    g += tg;
    fp += tfp;
    gp += tgp;
    const long double mag = std::abs(tf) + std::abs(tg) + std::abs(tfp) + std::abs(tgp);
    if (mag < 1e-24L) break;
  }
  return {static_cast<double>(kAi0 * f - kAip0 * g),
          static_cast<double>(kAi0 * fp - kAip0 * gp)};
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AsymptoticCoeffs {
  std::vector<double> u, v;
  AsymptoticCoeffs() {
    u.push_back(1.0);
    v.push_back(1.0);
    for (int k = 1; k < 40; ++k) {
      const double uk = u.back() * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
                        ((2.0 * k - 1.0) * 216.0 * k);
      u.push_back(uk);
      v.push_back(-(6.0 * k + 1.0) / (6.0 * k - 1.0) * uk);
    }
  }
};

const AsymptoticCoeffs& asym() {
  static const AsymptoticCoeffs c;
  return c;
}

// Sums sum_k (-1)^k c_{start + 2k} / zeta^{start + 2k} (stride 2) or the plain
// alternating sum (stride 1), truncated at the smallest term.
double asym_sum(const std::vector<double>& c, double zeta, int start, int stride) {
  double sum = 0.0;
  double last = INFINITY;
  int sign = 1;
  for (std::size_t k = start; k < c.size(); k += stride) {
    const double term = c[k] / std::pow(zeta, static_cast<double>(k));
    if (std::abs(term) > last) break;
    sum += sign * term;
    last = std::abs(term);
    if (last < 1e-18 * std::abs(sum)) break;
    sign = -sign;
  }
  return sum;
}

AiryPair airy_asymptotic(double x) {
  const auto& c = asym();
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  if (x > 0) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const double e = std::exp(-zeta);
    const double q = std::pow(x, 0.25);
    return {e / (2.0 * sqrt_pi * q) * asym_sum(c.u, zeta, 0, 1),
            -q * e / (2.0 * sqrt_pi) * asym_sum(c.v, zeta, 0, 1)};
  }
  const double y = -x;
  const double zeta = 2.0 / 3.0 * y * std::sqrt(y);
  const double theta = zeta - std::numbers::pi / 4.0;
  const double q = std::pow(y, 0.25);
  const double ue = asym_sum(c.u, zeta, 0, 2), uo = asym_sum(c.u, zeta, 1, 2);
  const double ve = asym_sum(c.v, zeta, 0, 2), vo = asym_sum(c.v, zeta, 1, 2);
  const double ct = std::cos(theta), st = std::sin(theta);
  return {(ct * ue + st * uo) / (sqrt_pi * q), q * (st * ve - ct * vo) / sqrt_pi};
}

}  // namespace

AiryPair airy_ai_both(double x) {
  if (std::isnan(x)) return {NAN, NAN};
  if (x > 6.0 || x < -8.0) return airy_asymptotic(x);
  return airy_maclaurin(x);
}

double airy_ai(double x) { return airy_ai_both(x).ai; }
double airy_ai_prime(double x) { return airy_ai_both(x).aip; }

// ---------------------------------------------------------------------------
// psi(u)

double psi_map(double u) {
  if (!(u > 1.0)) throw ArgumentError("psi_map: requires u > 1");
  const auto integral = integrate_endpoint_singular(
      [](double t) { return std::sqrt(std::max(0.0, 1.0 - 1.0 / (t * t))); }, 1.0, u,
      1e-14);
  return std::pow(1.5 * integral.value, 2.0 / 3.0);
}

double psi_map_derivative(double u) {
  const double psi = psi_map(u);
  return std::sqrt(1.0 - 1.0 / (u * u)) / std::sqrt(psi);
}

UniformApprox bessel_uniform_approx(int k, double u, double min_phase_distance) {
  if (k < 10) throw ArgumentError("bessel_uniform_approx: requires k >= 10");
  if (!(u > 1.0)) throw ArgumentError("bessel_uniform_approx: requires u > 1");
  const double psi = psi_map(u);
  const double dpsi = std::sqrt(1.0 - 1.0 / (u * u)) / std::sqrt(psi);
  const double kk = static_cast<double>(k);
  const double phase = 2.0 / 3.0 * kk * psi * std::sqrt(psi);
  // Distance of phase from -pi/4 + pi Z.
  const double pi = std::numbers::pi;
  const double shifted = std::fmod(phase + pi / 4.0, pi);
  const double dist = std::min(shifted, pi - shifted);
  if (dist < min_phase_distance)
    throw ArgumentError("bessel_uniform_approx: phase within " +
                        num_str(dist) +
                        " of an Airy zero; approximation not certified");
  const double k23 = std::cbrt(kk * kk);
  const double amp = std::pow(0.5 * k23 * u * dpsi, -0.5);
  return {amp * airy_ai(-k23 * psi), phase, dist};
}

}  // namespace fredholm
