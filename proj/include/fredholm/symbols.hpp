#pragma once

// Wiener-Hopf symbol pairs (phi_+, phi_-) and the Laurent coefficients of
// phi_-/phi_+ and phi_+/phi_- that enter the kernel
//
//   K(i, j) = sum_{k >= 1} (phi_-/phi_+)_{i+k} (phi_+/phi_-)_{-k-j}.
//
// Four parametric families are supported:
//
//   Exponential        phi_+ = e^{-tz},       phi_- = e^{-t/z}
//   Growth             phi_+ = (1+z)^n,       phi_- = (1 - r/z)^{-m}
//   Johansson          phi_+ = (1+tz)^M,      phi_- = (1 + t/z)^N
//   ConjectureProduct  phi_+ = prod (1+r_i z), phi_- = prod (1 - s_j/z)^{-1}
//
// The exponential pair is the reflection z -> -z of e^{t z^{+-1}}; with it the
// coefficients are exactly (phi_-/phi_+)_k = (phi_+/phi_-)_{-k} = J_k(2t), and
// the kernel differs from the unreflected one by the similarity
// diag((-1)^i), which leaves spectra, traces and determinants unchanged.

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fredholm {

enum class Family { Exponential, Growth, Johansson, ConjectureProduct };

struct ExponentialParams {
  double t = 0.0;
};

struct GrowthSymbolParams {
  int n = 1;
  int m = 1;
  double r = 0.0;
};

struct JohanssonParams {
  int M = 1;
  int N = 1;
  double t = 0.0;
};

struct ConjectureParams {
  std::vector<double> r;
  std::vector<double> s;
};

using SymbolParams =
    std::variant<ExponentialParams, GrowthSymbolParams, JohanssonParams, ConjectureParams>;

/// A validated symbol pair. Construct through make_symbol.
class SymbolSpec {
 public:
  Family family() const noexcept { return static_cast<Family>(params_.index()); }
  const SymbolParams& params() const noexcept { return params_; }

  template <class P>
  const P& as() const {
    return std::get<P>(params_);
  }

 private:
  explicit SymbolSpec(SymbolParams p) : params_(std::move(p)) {}
  friend SymbolSpec make_symbol(SymbolParams params);

  SymbolParams params_;
};

/// Validates family invariants. Throws ArgumentError on violation:
/// negative t, r outside [0, 1) (Growth), t >= 1 (Johansson, the binomial
/// series of (1 + t z^{+-1})^{-1} need |t| < 1 on the unit circle), negative
/// r_i or s_j, s_j >= 1, or max r_i * max s_j >= 1 (no annulus of analyticity).
SymbolSpec make_symbol(SymbolParams params);

inline SymbolSpec make_exponential(double t) { return make_symbol(ExponentialParams{t}); }
inline SymbolSpec make_growth_symbol(int n, int m, double r) {
  return make_symbol(GrowthSymbolParams{n, m, r});
}
inline SymbolSpec make_johansson(int M, int N, double t) {
  return make_symbol(JohanssonParams{M, N, t});
}
inline SymbolSpec make_conjecture(std::vector<double> r, std::vector<double> s) {
  return make_symbol(ConjectureParams{std::move(r), std::move(s)});
}

std::string family_name(Family f);
Family parse_family(const std::string& name);
std::string describe(const SymbolSpec& sym);

/// Open annulus inner < |z| < outer on which both ratios are analytic.
struct Annulus {
  double inner;
  double outer;  // may be +inf
};
Annulus analyticity_annulus(const SymbolSpec& sym);

enum class Ratio { MinusOverPlus, PlusOverMinus };

/// phi_-/phi_+ or phi_+/phi_- evaluated at z inside the annulus.
std::complex<double> ratio_value(const SymbolSpec& sym, Ratio ratio, std::complex<double> z);

/// When phi_+/phi_- is a Laurent polynomial, the largest q with a nonzero
/// coefficient at z^{-q}. Kernel columns j >= q then vanish identically.
std::optional<int> plus_over_minus_min_power(const SymbolSpec& sym);

enum class CoeffMethod { ClosedForm, SeriesConvolution, CircleQuadrature };

struct CoeffTable {
  Ratio ratio = Ratio::MinusOverPlus;
  int index_lo = 0;
  int index_hi = -1;
  std::vector<double> values;
  /// Estimated absolute error of every entry (series tail plus rounding).
  double tail_bound = 0.0;
  CoeffMethod method = CoeffMethod::ClosedForm;

  double at(int k) const { return values.at(static_cast<std::size_t>(k - index_lo)); }
};

/// The family's preferred method: Bessel values for Exponential, the
/// multiprecision terminating sums for Growth, series convolution otherwise.
CoeffMethod default_method(const SymbolSpec& sym);

/// Laurent coefficients of the chosen ratio on [index_lo, index_hi].
/// Throws ConvergenceError when the error estimate exceeds `tol`.
CoeffTable laurent_coeffs(const SymbolSpec& sym, Ratio ratio, int index_lo, int index_hi,
                          std::optional<CoeffMethod> method = std::nullopt,
                          double tol = 1e-10);

std::string ratio_name(Ratio r);
std::string method_name(CoeffMethod m);

}  // namespace fredholm
