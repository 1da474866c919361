#pragma once

// Multiprecision evaluation of the Growth-family coefficients
//
//   f_p = (phi_-/phi_+)_p   with phi_-/phi_+ = (1+z)^{-n} (1 - r/z)^{-m},
//   g_q = (phi_+/phi_-)_q   with phi_+/phi_- = (1+z)^n (1 - r/z)^m,
//
// and of the kernel entries and traces built from them. f_p is an infinite
// alternating convolution; it is rewritten as a terminating sum of n (p >= 0)
// or m (p < 0) terms. All three sums cancel heavily for large m, so they are
// evaluated in MPFR with the working precision raised until at least 64 bits
// survive the measured cancellation.

#include <Eigen/Dense>
#include <vector>

namespace fredholm {

struct ExactDet {
  double value = 1.0;
  /// ln |det|, finite even when value underflows.
  double log_abs = 0.0;
  int sign = 1;
  long precision = 0;
};

class GrowthExact {
 public:
  /// Throws ArgumentError unless n, m >= 1 and 0 <= r < 1.
  GrowthExact(int n, int m, double r);

  /// f_p for p in [lo, hi]. Throws ConvergenceError when a value overflows
  /// the double range.
  std::vector<double> minus_over_plus(int lo, int hi) const;
  /// g_q for q in [lo, hi]; zero outside [-m, n].
  std::vector<double> plus_over_minus(int lo, int hi) const;

  /// K(i, j) for i in [offset, offset + rows), j in [offset, offset + cols).
  /// Entries are exact up to rounding: the k-sum terminates at k = m - j.
  Eigen::MatrixXd section(int offset, int rows, int cols) const;

  /// det(I - v K) on l^2({offset, ...}), computed on the exact active block
  /// in multiprecision; the precision is doubled until the result is stable
  /// to 2^-60 relative.
  ExactDet det(int offset, double v = 1.0) const;
  /// sum_{i >= offset} K(i, i) = sum_{q = offset+1}^{m} (q - offset) f_q g_{-q}.
  double trace(int offset) const;

  /// Bits of working precision used by the most recent call.
  long last_precision() const noexcept { return last_prec_; }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  double r() const noexcept { return r_; }

 private:
  int n_, m_;
  double r_;
  mutable long last_prec_ = 0;
};

}  // namespace fredholm
