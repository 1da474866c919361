#include "fredholm/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/specfun.hpp"

namespace fredholm {
namespace {

// Parlett-Reinsch balancing by powers of two (similarity, exact in floating point).
Eigen::MatrixXd balance(Eigen::MatrixXd A) {
  const int n = static_cast<int>(A.rows());
  bool done = false;
  for (int sweep = 0; sweep < 1000 && !done; ++sweep) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / 2.0, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
  return A;
}

struct Conditioned {
  Eigen::MatrixXd B;
  bool symmetric = false;
  double residual = 0.0;
};

Conditioned condition(const KernelMatrix& km) {
  Conditioned c;
  if (km.size == 0) {
    c.symmetric = true;
    return c;
  }
  const Symmetrizer s = find_symmetrizer(km);
  c.residual = s.residual;
  if (s.possible && s.residual <= 1e-8 * std::max(s.scale, 1e-300)) {
    c.B = symmetrized_entries(km, s);
    c.symmetric = true;
  } else {
    c.B = balance(km.entries);
  }
  return c;
}

double det_of(const Eigen::MatrixXd& B, double v) {
  if (B.rows() == 0) return 1.0;
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(B.rows(), B.cols()) - v * B;
  return M.partialPivLu().determinant();
}

std::vector<std::complex<double>> eig_of(const Conditioned& c, int pad_to) {
  std::vector<std::complex<double>> ev;
  if (c.B.rows() > 0) {
    if (c.symmetric) {
      const Eigen::MatrixXd S = 0.5 * (c.B + c.B.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
      for (int i = 0; i < S.rows(); ++i) ev.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> es(c.B, false);
      for (int i = 0; i < c.B.rows(); ++i) ev.push_back(es.eigenvalues()(i));
    }
  }
  while (static_cast<int>(ev.size()) < pad_to) ev.emplace_back(0.0, 0.0);
  std::stable_sort(ev.begin(), ev.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return ev;
}

int pad_size(const KernelMatrix& km) {
  return km.exact_section ? std::max(km.size, km.requested_size) : km.size;
}

}  // namespace

double trace(const KernelMatrix& km) { return km.size ? km.entries.trace() : 0.0; }

namespace {

// Growth sections are evaluated in multiprecision: their determinants fall
// far below what an LU in double can resolve.
double det_value(const KernelMatrix& km, const Eigen::MatrixXd& B, double v) {
  if (km.exact_section && km.sym.family() == Family::Growth) {
    const auto& p = km.sym.as<GrowthSymbolParams>();
    if (p.r > 0.0) return GrowthExact(p.n, p.m, p.r).det(km.offset, v).value;
  }
  return det_of(B, v);
}

}  // namespace

double fredholm_det_value(const KernelMatrix& km, double v) {
  return det_value(km, condition(km).B, v);
}

DetResult fredholm_det(const KernelMatrix& km, double v, std::optional<double> tol) {
  DetResult r;
  r.v = v;
  r.size = km.size;
  r.value = fredholm_det_value(km, v);
  if (!km.exact_section) {
    KernelMatrix bigger = build_kernel(km.sym, km.offset, km.size + 20, km.tol);
    if (km.weight_base) bigger = apply_weight(bigger, WeightKind::Geometric, *km.weight_base);
    r.stability_delta = std::abs(fredholm_det_value(bigger, v) - r.value);
  }
  if (tol && r.stability_delta > *tol)
    throw ConvergenceError("fredholm_det: N vs N+20 difference " +
                               num_str(r.stability_delta) + " exceeds tolerance",
                           r.stability_delta);
  return r;
}

std::vector<std::complex<double>> eigenvalues(const KernelMatrix& km, std::string* solver) {
  const Conditioned c = condition(km);
  if (solver) *solver = c.symmetric ? "symmetrized" : "general";
  return eig_of(c, pad_size(km));
}

std::vector<double> derivatives_from_eigenvalues(const std::vector<double>& lambda, int k_max) {
  double det = 1.0;
  std::vector<double> e(k_max + 1, 0.0);
  e[0] = 1.0;
  for (double l : lambda) {
    if (!(l < 1.0)) throw PreconditionError("det_v_derivatives: eigenvalue >= 1");
    det *= 1.0 - l;
    const double mu = l / (1.0 - l);
    for (int k = k_max; k >= 1; --k) e[k] += mu * e[k - 1];
  }
  std::vector<double> out(k_max + 1);
  double fact = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) fact *= k;
    out[k] = det * fact * ((k % 2) ? -1.0 : 1.0) * e[k];
  }
  return out;
}

namespace {

std::vector<double> real_spectrum_or_throw(const std::vector<std::complex<double>>& ev,
                                           double tol, const char* what) {
  std::vector<double> out;
  for (const auto& z : ev) {
    if (std::abs(z.imag()) > tol)
      throw PreconditionError(std::string(what) + ": spectrum is not real");
    out.push_back(z.real());
  }
  return out;
}

}  // namespace

std::vector<double> det_v_derivatives(const KernelMatrix& km, int k_max) {
  if (k_max < 0) throw ArgumentError("det_v_derivatives: k_max must be >= 0");
  return derivatives_from_eigenvalues(
      real_spectrum_or_throw(eigenvalues(km), 1e-8, "det_v_derivatives"), k_max);
}

Lemma1Report lemma1_check(const KernelMatrix& km, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("lemma1_check: v must lie in [0, 1]");
  const auto lam = real_spectrum_or_throw(eigenvalues(km), 1e-8, "lemma1_check");
  for (double l : lam)
    if (v * l > 1.0 + 1e-12) throw PreconditionError("lemma1_check: v * lambda > 1");
  Lemma1Report r;
  r.v = v;
  r.det = fredholm_det_value(km, v);
  r.exp_bound = std::exp(-v * trace(km));
  r.holds = r.det <= r.exp_bound + 1e-12;
  return r;
}

SpectrumReport spectrum(const KernelMatrix& km, const SpectrumOptions& opt) {
  SpectrumReport rep;
  const Conditioned c = condition(km);
  rep.solver = c.symmetric ? "symmetrized" : "general";
  rep.symmetrizer_residual = c.residual;
  rep.eigenvalues = eig_of(c, pad_size(km));
  rep.trace = trace(km);
  for (double v : opt.vs) rep.det_at_v[v] = det_value(km, c.B, v);
  bool real = true;
  for (const auto& z : rep.eigenvalues) {
    rep.max_imag = std::max(rep.max_imag, std::abs(z.imag()));
    if (z.real() < -opt.real_tol || z.real() > 1.0 + opt.real_tol) rep.in_unit_interval = false;
  }
  if (rep.max_imag > opt.real_tol) {
    real = false;
    rep.in_unit_interval = false;
  }
  if (!real) {
    rep.counterexample_candidate = true;
    rep.flag_reason = "eigenvalue with imaginary part " + num_str(rep.max_imag);
  } else if (!rep.in_unit_interval) {
    rep.counterexample_candidate = true;
    rep.flag_reason = "eigenvalue outside [0, 1]";
  }
  std::vector<double> lam;
  for (const auto& z : rep.eigenvalues) lam.push_back(z.real());
  const bool below_one = std::all_of(lam.begin(), lam.end(), [](double l) { return l < 1.0; });
  if (real && below_one) {
    rep.derivs = derivatives_from_eigenvalues(lam, opt.derivative_order);
    const double det1 = rep.det_at_v.count(1.0) ? rep.det_at_v[1.0] : det_value(km, c.B, 1.0);
    rep.lemma1_holds = det1 <= std::exp(-rep.trace) + 1e-12;
  }
  return rep;
}

double bessel_trace(int n, double t) {
  const double x = 2.0 * t;
  if (x == 0.0) return 0.0;
  const int pmax = std::max(n, static_cast<int>(std::ceil(x))) + 64 +
                   static_cast<int>(std::ceil(20.0 * std::cbrt(x)));
  const auto J = bessel_j_sequence(std::max(pmax, 0), x);
  auto Jat = [&](int p) {
    const double v = J[std::abs(p)];
    return (p < 0 && (p % 2 != 0)) ? -v : v;
  };
  double s = 0.0;
  for (int k = pmax - n; k >= 1; --k) {
    const double j = Jat(n + k);
    s += k * j * j;
  }
  return s;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ArgumentError("linear_fit: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("linear_fit: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

Prop1Result prop1_experiment(const std::vector<int>& n_list, const std::vector<double>& s_list,
                             double alpha1, double alpha2, int threads) {
  if (!(0.0 < alpha1 && alpha1 < alpha2 && alpha2 < 1.0))
    throw ArgumentError("prop1_experiment: need 0 < alpha1 < alpha2 < 1");
  Prop1Result res;
  res.alpha1 = alpha1;
  res.alpha2 = alpha2;
  for (int n : n_list) {
    if (n < 1) throw ArgumentError("prop1_experiment: n must be >= 1");
    for (double s : s_list) {
      if (s < 0.0) throw ArgumentError("prop1_experiment: s must be >= 0");
      Prop1Row row;
      row.n = n;
      row.s = s;
      res.rows.push_back(row);
    }
  }
  parallel_for(0, static_cast<int>(res.rows.size()), [&](int idx) {
    Prop1Row& row = res.rows[idx];
    const int n = row.n;
    const double s = row.s;
    const double n13 = std::cbrt(static_cast<double>(n));
    row.t = 0.5 * (n + s * n13);
    row.trace = bessel_trace(n, row.t);
    row.trace_over_t = row.t > 0.0 ? row.trace / row.t : 0.0;
    row.band_lo = std::max(1, static_cast<int>(std::ceil(alpha1 * s * n13)));
    row.band_hi = static_cast<int>(std::floor(alpha2 * s * n13));
    if (row.band_hi < row.band_lo || s <= 0.0) return;
    const double x = 2.0 * row.t;
    const auto J = bessel_j_sequence(n + row.band_hi, x);
    double sum = 0.0, sq = 0.0;
    int certified = 0, count = 0;
    for (int k = row.band_lo; k <= row.band_hi; ++k) {
      const double j = J[n + k];
      sum += k * j * j;
      sq += j * j;
      ++count;
      const int order = n + k;
      const double u = x / order;
      if (order >= 10 && u > 1.0) {
        const double psi = psi_map(u);
        const double phase = 2.0 / 3.0 * order * psi * std::sqrt(psi);
        const double shifted = std::fmod(phase + std::numbers::pi / 4.0, std::numbers::pi);
        if (std::min(shifted, std::numbers::pi - shifted) >= 0.2) ++certified;
      }
    }
    row.band_sum_scaled = sum / std::pow(s, 1.5);
    row.band_rms_scaled = std::sqrt(sq / count) * n13 * std::pow(s, 0.25);
    row.certified_fraction = static_cast<double>(certified) / count;
  }, threads);
  for (int n : n_list) {
    const double smax = std::pow(static_cast<double>(n), 2.0 / 3.0);
    std::vector<double> lx, ly;
    for (const auto& row : res.rows)
      if (row.n == n && row.s > 0.0 && row.s <= smax && row.trace > 0.0) {
        lx.push_back(std::log(row.s));
        ly.push_back(std::log(row.trace));
      }
    Prop1Fit fit;
    fit.n = n;
    fit.points = static_cast<int>(lx.size());
    if (lx.size() >= 2) std::tie(fit.slope, fit.intercept) = linear_fit(lx, ly);
    res.fits.push_back(fit);
  }
  return res;
}

}  // namespace fredholm
