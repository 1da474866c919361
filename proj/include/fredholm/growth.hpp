#pragma once

// Growth-model analytics for phi_+ = (1+z)^n, phi_- = (1 - r/z)^{-m} with
// n = alpha m: time constant, saddle points of
//
//   sigma(z, c') = alpha log(1+z) + log(r - z) + (c' - 1) log(-z),
//
// the nested-circle double-integral trace, and the leading s^{3/2} term.

#include <complex>
#include <vector>

namespace fredholm {

struct GrowthParams {
  double alpha = 1.0;
  double r = 0.0;
  int m = 1;
  double s = 0.0;
  int n = 1;
  double c = 0.0;
  /// c - s m^{-2/3} as written.
  double c_prime_nominal = 0.0;
  /// floor(c'_nominal m).
  int h = 0;
  /// h / m, the value the integer offset actually realizes.
  double c_prime = 0.0;
};

/// Validates alpha > 0, r in (0, 1), alpha r < 1, alpha m integral, s >= 0
/// and c' > 0; throws ArgumentError / RegimeError otherwise.
GrowthParams make_growth_params(double alpha, double r, int m, double s);

/// ((1 - alpha) r + 2 sqrt(alpha r)) / (1 + r).
double time_constant(double alpha, double r);

struct CriticalPoints {
  std::complex<double> u_plus;
  std::complex<double> u_minus;
  double discriminant = 0.0;
};

/// Roots of (alpha + c') u^2 + ((1 - r) c' + (1 - alpha) r) u + (1 - c') r = 0,
/// u_plus in the closed upper half-plane. Throws RegimeError when the
/// discriminant ((1+r) c' + (alpha-1) r)^2 - 4 alpha r is positive.
CriticalPoints critical_points(double alpha, double r, double c_prime);

/// sigma(z, c') continued along the straight segment from z = -1/2, which
/// stays in the plane cut along (-inf, -1] and [0, inf). Throws ArgumentError
/// on the cut set.
std::complex<double> sigma(std::complex<double> z, double alpha, double r, double c_prime);

/// sigma'(z) and sigma''(z) in closed form.
std::complex<double> sigma_prime(std::complex<double> z, double alpha, double r, double c_prime);
std::complex<double> sigma_second(std::complex<double> z, double alpha, double r, double c_prime);

struct LeadingTrace {
  /// (m / pi) int_{c'}^{c} |arg(-u_gamma^+)| dgamma.
  double value = 0.0;
  /// (m / 2 pi) Im[sigma(u+, c') - sigma(u-, c')].
  double endpoint_value = 0.0;
  double relative_difference = 0.0;
  double quadrature_error = 0.0;
};

/// Leading-order trace at c' = gp.c_prime (the lattice value).
LeadingTrace leading_trace(const GrowthParams& gp);
/// Same at an arbitrary c' in (0, c].
LeadingTrace leading_trace_at(double alpha, double r, int m, double c_prime);

struct ContourTrace {
  double value = 0.0;
  double imag_residue = 0.0;
  double rho1 = 0.0, rho2 = 0.0;
  int nodes = 0;
  /// |T(N) - T(N/2)|.
  double refinement_delta = 0.0;
};

/// (1 / 4 pi^2) double integral over |z2| = rho2 < |z1| = rho1 of
/// psi(z2) / psi(z1) z1 z2 / (z1 - z2)^2 dtheta1 dtheta2 with
/// psi(z) = (1+z)^n (1 - r/z)^m z^h, trapezoidal in both angles.
/// Throws ConvergenceError when node doubling stalls above rel_tol.
ContourTrace trace_contour(int n, int m, double r, int h, double rel_tol = 1e-10);
ContourTrace trace_contour(const GrowthParams& gp, double rel_tol = 1e-10);

struct Lemma3Row {
  int m = 0;
  double s = 0.0;
  int h = 0;
  double c_prime = 0.0;
  double s_effective = 0.0;
  double trace_matrix = 0.0;
  /// NaN when the contour route was skipped.
  double trace_contour = 0.0;
  double leading = 0.0;
  double det = 1.0;
  double exp_minus_trace = 1.0;
  bool lemma1_holds = true;
};

struct Lemma3Result {
  std::vector<Lemma3Row> rows;
  /// det nonincreasing along s at each m.
  bool det_monotone = true;
  bool lemma1_all = true;
};

/// contour_max_m: the contour route is evaluated only for m <= contour_max_m.
Lemma3Result lemma3_experiment(double alpha, double r, const std::vector<int>& m_list,
                               const std::vector<double>& s_list, int contour_max_m = 80,
                               int threads = 0);

}  // namespace fredholm
