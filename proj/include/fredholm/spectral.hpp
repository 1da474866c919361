#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fredholm/kernels.hpp"

namespace fredholm {

/// Sum of the diagonal entries.
double trace(const KernelMatrix& km);

struct DetResult {
  double v = 1.0;
  double value = 1.0;
  /// |det at size N - det at size N + 20|; 0 for exact sections.
  double stability_delta = 0.0;
  int size = 0;
};

/// det(I - v K_N) by LU of the symmetrized (or balanced) matrix, with the
/// N vs N+20 stability check. Throws ConvergenceError when `tol` is given
/// and the stability delta exceeds it.
DetResult fredholm_det(const KernelMatrix& km, double v = 1.0,
                       std::optional<double> tol = std::nullopt);

/// det(I - v K_N) without the stability rebuild.
double fredholm_det_value(const KernelMatrix& km, double v = 1.0);

struct SpectrumReport {
  /// Sorted by real part, descending; exact sections are padded with zeros
  /// up to the requested size.
  std::vector<std::complex<double>> eigenvalues;
  double max_imag = 0.0;
  std::map<double, double> det_at_v;
  double trace = 0.0;
  std::vector<double> derivs;
  bool lemma1_holds = true;
  bool in_unit_interval = true;
  /// "symmetrized" or "general".
  std::string solver;
  double symmetrizer_residual = 0.0;
  /// Set when eigenvalues leave [-1e-8, 1 + 1e-8] or have imaginary part
  /// above 1e-8.
  bool counterexample_candidate = false;
  std::string flag_reason;
};

struct SpectrumOptions {
  std::vector<double> vs{0.5, 1.0};
  int derivative_order = 3;
  double real_tol = 1e-8;
};

SpectrumReport spectrum(const KernelMatrix& km, const SpectrumOptions& opt = {});

/// Eigenvalues only (sorted, padded as in SpectrumReport).
std::vector<std::complex<double>> eigenvalues(const KernelMatrix& km, std::string* solver = nullptr);

/// d^k/dv^k det(I - v K) at v = 1 for k = 0..k_max, from
/// det(I-K) k! (-1)^k e_k(lambda / (1 - lambda)). Throws PreconditionError
/// unless the spectrum is real with every eigenvalue below 1.
std::vector<double> det_v_derivatives(const KernelMatrix& km, int k_max);
std::vector<double> derivatives_from_eigenvalues(const std::vector<double>& lambda, int k_max);

struct Lemma1Report {
  double v = 1.0;
  double det = 1.0;
  double exp_bound = 1.0;
  bool holds = true;
};

/// det(I - vK) <= exp(-v tr K) + 1e-12. Throws PreconditionError unless the
/// spectrum is real with v lambda <= 1.
Lemma1Report lemma1_check(const KernelMatrix& km, double v);

/// sum_{k>=1} k J_{n+k}(2t)^2, the trace of the exponential kernel on
/// l^2({n, n+1, ...}).
double bessel_trace(int n, double t);

struct Prop1Row {
  int n = 0;
  double s = 0.0;
  double t = 0.0;
  double trace = 0.0;
  double trace_over_t = 0.0;
  int band_lo = 0, band_hi = 0;
  /// sum over the band of k J_{n+k}(2t)^2, divided by s^{3/2}.
  double band_sum_scaled = 0.0;
  /// rms of |J_{n+k}(2t)| over the band times n^{1/3} s^{1/4}.
  double band_rms_scaled = 0.0;
  /// Fraction of band indices whose uniform-approximation phase is at least
  /// 0.2 away from -pi/4 + pi Z.
  double certified_fraction = 0.0;
};

struct Prop1Fit {
  int n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

struct Prop1Result {
  std::vector<Prop1Row> rows;
  std::vector<Prop1Fit> fits;
  double alpha1 = 0.5, alpha2 = 0.9;
};

/// For 2t = n + s n^{1/3}: traces, band diagnostics, and per-n log-log fits
/// of trace vs s over s in [s_min, min(s_max, n^{2/3})].
Prop1Result prop1_experiment(const std::vector<int>& n_list, const std::vector<double>& s_list,
                             double alpha1 = 0.5, double alpha2 = 0.9, int threads = 0);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fredholm
