#include "fredholm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fredholm/errors.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/specfun.hpp"

namespace fredholm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNoiseFloor = 1e-300;

KernelMatrix exponential_kernel(const SymbolSpec& sym, int offset, int size, double tol) {
  const double x = 2.0 * sym.as<ExponentialParams>().t;
  KernelMatrix km{sym};
  km.offset = offset;
  km.size = size;
  km.requested_size = size;
  km.tol = tol;
  km.entries = Eigen::MatrixXd::Zero(size, size);
  if (x == 0.0) return km;
  // Entries only use J_p with p >= offset + 1; by Cauchy-Schwarz the k-sum
  // tail beyond k = kc is bounded by sum_{p > offset + kc} J_p^2.
  const int lo = std::max(offset + 1, 0);
  int pmax = std::max(lo + size, static_cast<int>(std::ceil(x))) + 64 +
             static_cast<int>(std::ceil(20.0 * std::cbrt(x)));
  std::vector<double> J = bessel_j_sequence(pmax, x);
  // J_{-p} = (-1)^p J_p for any negative offsets.
  auto Jat = [&](int p) {
    const double v = J[std::abs(p)];
    return (p < 0 && (p % 2 != 0)) ? -v : v;
  };
  std::vector<double> tail_sq(pmax + 2, 0.0);
  for (int p = pmax; p >= 0; --p) tail_sq[p] = tail_sq[p + 1] + J[p] * J[p];
  // tail_sq[p] = sum_{q >= p} J_q^2; the last stored J is far below 1e-300.
  int kc = 1;
  while (offset + kc + 1 <= pmax && tail_sq[std::max(0, offset + kc + 1)] > 0.1 * tol) ++kc;
  if (offset + kc + 1 > pmax)
    throw ConvergenceError("build_kernel: Bessel table too short for the k-sum cutoff");
  km.ksum_cut = kc;
  const double tail = offset + kc + 1 >= 0 ? tail_sq[offset + kc + 1] : 1.0;
  km.entry_error = tail + 4.0 * kEps * kc;
  parallel_for(0, size, [&](int a) {
    for (int b = 0; b <= a; ++b) {
      double s = 0.0;
      for (int k = 1; k <= kc; ++k) s += Jat(offset + a + k) * Jat(offset + b + k);
      km.entries(a, b) = s;
      km.entries(b, a) = s;
    }
  });
  return km;
}

KernelMatrix growth_kernel(const SymbolSpec& sym, int offset, int size, double tol) {
  const auto& p = sym.as<GrowthSymbolParams>();
  KernelMatrix km{sym};
  km.offset = offset;
  km.requested_size = size;
  km.tol = tol;
  km.exact_section = true;
  const int q = p.r == 0.0 ? 0 : p.m;
  const int active = std::max(q - offset, 0);
  km.size = active;
  km.requested_size = std::max(size, active);
  km.ksum_cut = std::max(0, q - offset);
  if (active == 0) {
    km.entries = Eigen::MatrixXd::Zero(0, 0);
    return km;
  }
  GrowthExact ge(p.n, p.m, p.r);
  km.entries = ge.section(offset, active, active);
  km.entry_error = km.entries.cwiseAbs().maxCoeff() * 4.0 * kEps;
  return km;
}

// Generic route: coefficient tables and a k-sum cutoff doubled until the
// contribution of the last half falls below tol.
KernelMatrix series_kernel(const SymbolSpec& sym, int offset, int size, double tol) {
  KernelMatrix km{sym};
  km.offset = offset;
  km.requested_size = size;
  km.tol = tol;
  const auto q = plus_over_minus_min_power(sym);
  int rows = size;
  if (q) {
    km.exact_section = true;
    rows = std::max(*q - offset, 0);
    km.requested_size = std::max(size, rows);
  }
  km.size = rows;
  km.entries = Eigen::MatrixXd::Zero(rows, rows);
  if (rows == 0) return km;

  auto build = [&](int kc, Eigen::MatrixXd& out, double& coeff_err) {
    const auto f = laurent_coeffs(sym, Ratio::MinusOverPlus, offset + 1, offset + rows - 1 + kc,
                                  std::nullopt, tol);
    const auto g = laurent_coeffs(sym, Ratio::PlusOverMinus, -kc - (offset + rows - 1), -offset - 1,
                                  std::nullopt, tol);
    coeff_err = 0.0;
    double fsum = 0.0, gsum = 0.0;
    for (double v : f.values) fsum += std::abs(v);
    for (double v : g.values) gsum += std::abs(v);
    coeff_err = f.tail_bound * (gsum + kc * g.tail_bound) + g.tail_bound * fsum;
    out.resize(rows, rows);
    parallel_for(0, rows, [&](int a) {
      for (int b = 0; b < rows; ++b) {
        double s = 0.0;
        for (int k = 1; k <= kc; ++k) s += f.at(offset + a + k) * g.at(-k - offset - b);
        out(a, b) = s;
      }
    });
  };

  if (q) {
    // phi_+/phi_- vanishes below z^{-q}: the k-sum stops at k = q - j.
    const int kc = std::max(1, *q - offset);
    double cerr = 0.0;
    build(kc, km.entries, cerr);
    km.ksum_cut = kc;
    km.entry_error = cerr + 4.0 * kEps * kc * std::max(1.0, km.entries.cwiseAbs().maxCoeff());
    if (cerr > tol) throw ConvergenceError("build_kernel: coefficient error " + num_str(cerr) + " above tolerance", cerr);
    return km;
  }

  int kc = 32;
  Eigen::MatrixXd prev;
  double cerr = 0.0;
  build(kc, prev, cerr);
  for (int iter = 0; iter < 12; ++iter) {
    Eigen::MatrixXd cur;
    build(2 * kc, cur, cerr);
    const double delta = (cur - prev).cwiseAbs().maxCoeff();
    if (delta + cerr <= tol) {
      km.entries = std::move(cur);
      km.ksum_cut = 2 * kc;
      km.entry_error = delta + cerr;
      return km;
    }
    prev = std::move(cur);
    kc *= 2;
  }
  throw ConvergenceError("build_kernel: k-sum did not converge", cerr);
}

}  // namespace

int default_kernel_size(const SymbolSpec& sym, int offset) {
  switch (sym.family()) {
    case Family::Exponential: {
      const double x = 2.0 * sym.as<ExponentialParams>().t;
      const int a = 4 * static_cast<int>(std::ceil(std::sqrt(x)));
      const int b = static_cast<int>(std::ceil(x)) - offset +
                    12 * static_cast<int>(std::ceil(std::cbrt(x))) + 20;
      return std::max({48, a, b});
    }
    case Family::Growth: return std::max(48, 2 * sym.as<GrowthSymbolParams>().m);
    case Family::Johansson: {
      const auto& p = sym.as<JohanssonParams>();
      return std::max(48, 2 * std::max(p.M, p.N));
    }
    case Family::ConjectureProduct: return 48;
  }
  return 48;
}

KernelMatrix build_kernel(const SymbolSpec& sym, int offset, int size, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("build_kernel: tol must be > 0");
  if (size <= 0) size = default_kernel_size(sym, offset);
  switch (sym.family()) {
    case Family::Exponential: return exponential_kernel(sym, offset, size, tol);
    case Family::Growth: return growth_kernel(sym, offset, size, tol);
    default: return series_kernel(sym, offset, size, tol);
  }
}

KernelMatrix apply_weight(const KernelMatrix& km, WeightKind kind, double base) {
  if (kind == WeightKind::None) return km;
  if (!(base > 0.0)) throw ArgumentError("apply_weight: base must be > 0");
  KernelMatrix out = km;
  const double lb = std::log(base);
  for (int a = 0; a < km.size; ++a)
    for (int b = 0; b < km.size; ++b)
      out.entries(a, b) = km.entries(a, b) * std::exp(lb * (a - b));
  out.weight_base = km.weight_base.value_or(1.0) * base;
  return out;
}

Symmetrizer find_symmetrizer(const KernelMatrix& km) {
  const int n = km.size;
  const auto& K = km.entries;
  Symmetrizer s;
  s.log_d = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double up = K(i, i + 1), down = K(i + 1, i);
    if (std::abs(up) <= kNoiseFloor || std::abs(down) <= kNoiseFloor) {
      s.log_d(i + 1) = 0.0;
      ++s.blocks;
      continue;
    }
    if (up * down < 0.0) {
      s.possible = false;
      s.reason = "K(i,i+1) and K(i+1,i) have opposite signs at i=" + std::to_string(i);
      s.log_d(i + 1) = s.log_d(i);
      continue;
    }
    s.log_d(i + 1) = s.log_d(i) + 0.5 * (std::log(std::abs(up)) - std::log(std::abs(down)));
  }
  for (int i = 0; i < n && s.possible; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(K(i, j)) > kNoiseFloor && std::abs(K(j, i)) > kNoiseFloor &&
          K(i, j) * K(j, i) < 0.0) {
        s.possible = false;
        s.reason = "K(i,j) K(j,i) < 0 at (" + std::to_string(i) + "," + std::to_string(j) + ")";
        break;
      }
  const Eigen::MatrixXd S = symmetrized_entries(km, s);
  s.scale = n ? S.cwiseAbs().maxCoeff() : 0.0;
  s.residual = n ? (S - S.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(s.residual)) s.residual = std::numeric_limits<double>::infinity();
  return s;
}

Eigen::MatrixXd symmetrized_entries(const KernelMatrix& km, const Symmetrizer& sym) {
  const int n = km.size;
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double k = km.entries(i, j);
      if (k == 0.0) {
        S(i, j) = 0.0;
        continue;
      }
      const double mag = std::exp(std::log(std::abs(k)) + sym.log_d(i) - sym.log_d(j));
      S(i, j) = k < 0.0 ? -mag : mag;
    }
  return S;
}

double last_row_magnitude(const KernelMatrix& km) {
  if (km.size == 0) return 0.0;
  return km.entries.row(km.size - 1).cwiseAbs().maxCoeff();
}

}  // namespace fredholm
