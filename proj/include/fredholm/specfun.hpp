#pragma once

// Special functions used by the kernels and the asymptotic checks:
// integer-order Bessel J, Airy Ai/Ai', and the map psi(u) from the
// uniform (Airy-type) expansion of J_k(k u) in the oscillatory region u > 1.

#include <vector>

namespace fredholm {

enum class BesselMethod { MillerRecurrence, PowerSeries };

struct BesselEval {
  int order = 0;
  double argument = 0.0;
  double value = 0.0;
  BesselMethod method = BesselMethod::MillerRecurrence;
  /// True when the value is exactly 0 because J_k(x) is below the double range.
  bool underflow = false;
};

/// J_k(x) for integer k >= 0 and x >= 0, absolute error <= 1e-12.
BesselEval bessel_j_eval(int k, double x);

inline double bessel_j(int k, double x) { return bessel_j_eval(k, x).value; }

/// J_0(x), ..., J_kmax(x) from one Miller sweep. Entries below the double
/// range are returned as 0.
std::vector<double> bessel_j_sequence(int kmax, double x);

/// Ai(x), absolute error <= 1e-10 on [-20, inf).
double airy_ai(double x);
/// Ai'(x), same accuracy regime as airy_ai.
double airy_ai_prime(double x);

struct AiryPair {
  double ai;
  double aip;
};
AiryPair airy_ai_both(double x);

/// psi(u) with (2/3) psi^{3/2} = int_1^u sqrt(1 - t^-2) dt, u > 1.
/// The integral is evaluated by adaptive quadrature.
double psi_map(double u);

/// psi'(u) = sqrt(1 - u^-2) / sqrt(psi(u)).
double psi_map_derivative(double u);

struct UniformApprox {
  double value;
  /// (2/3) k psi(u)^{3/2}; the approximation is uncertified near -pi/4 + pi Z.
  double phase;
  /// Distance of phase from the set -pi/4 + pi Z.
  double phase_distance;
};

/// ((1/2) k^{2/3} u psi'(u))^{-1/2} Ai(-k^{2/3} psi(u)), the leading uniform
/// approximation of J_k(k u). Throws ArgumentError when k < 10, u <= 1, or
/// the phase lies within `min_phase_distance` of an Airy zero.
UniformApprox bessel_uniform_approx(int k, double u,
                                    double min_phase_distance = 0.2);

}  // namespace fredholm
