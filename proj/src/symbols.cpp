#include "fredholm/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "fredholm/errors.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/specfun.hpp"

namespace fredholm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Power series sum_k c_k w^k generated lazily from a recurrence.
class Series {
 public:
  using Rule = std::function<double(int, const std::vector<double>&)>;
  Series(Rule rule, std::optional<int> degree) : rule_(std::move(rule)), degree_(degree) {}

  double operator[](int k) {
    if (k < 0) return 0.0;
    if (degree_ && k > *degree_) return 0.0;
    while (static_cast<int>(c_.size()) <= k) c_.push_back(rule_(static_cast<int>(c_.size()), c_));
    return c_[k];
  }
  std::optional<int> degree() const { return degree_; }

 private:
  Rule rule_;
  std::optional<int> degree_;
  std::vector<double> c_;
};

Series exp_series(double a) {
  return Series([a](int k, const std::vector<double>& c) { return k == 0 ? 1.0 : c[k - 1] * a / k; },
                std::nullopt);
}

// (1 + a w)^e for integer e >= 0.
Series binom_pos(int e, double a) {
  return Series(
      [e, a](int k, const std::vector<double>& c) {
        return k == 0 ? 1.0 : c[k - 1] * a * (e - k + 1) / k;
      },
      a == 0.0 ? 0 : e);
}

// (1 + a w)^{-e}.
Series binom_neg(int e, double a) {
  return Series(
      [e, a](int k, const std::vector<double>& c) {
        return k == 0 ? 1.0 : c[k - 1] * (-a) * (e + k - 1) / k;
      },
      a == 0.0 ? std::optional<int>(0) : std::nullopt);
}

// prod (1 + a_i w) as a coefficient vector.
std::vector<double> product_poly(const std::vector<double>& roots_coeff) {
  std::vector<double> p{1.0};
  for (double a : roots_coeff) {
    if (a == 0.0) continue;
    p.push_back(0.0);
    for (std::size_t k = p.size() - 1; k >= 1; --k) p[k] += a * p[k - 1];
  }
  return p;
}

Series poly_series(std::vector<double> p) {
  const int deg = static_cast<int>(p.size()) - 1;
  return Series([p](int k, const std::vector<double>&) { return p[k]; }, deg);
}

Series reciprocal_series(std::vector<double> p) {
  const bool trivial = p.size() == 1;
  return Series(
      [p](int k, const std::vector<double>& c) {
        double v = k == 0 ? 1.0 : 0.0;
        const int deg = static_cast<int>(p.size()) - 1;
        for (int j = 1; j <= std::min(k, deg); ++j) v -= p[j] * c[k - j];
        return v;
      },
      trivial ? std::optional<int>(0) : std::nullopt);
}

// Factor series for a ratio: `a` in powers of z, `b` in powers of 1/z.
struct FactorPair {
  Series a;
  Series b;
};

FactorPair factor_pair(const SymbolSpec& sym, Ratio ratio) {
  const bool mop = ratio == Ratio::MinusOverPlus;
  return std::visit(
      Overloaded{
          [&](const ExponentialParams& p) {
            return mop ? FactorPair{exp_series(p.t), exp_series(-p.t)}
                       : FactorPair{exp_series(-p.t), exp_series(p.t)};
          },
          [&](const GrowthSymbolParams& p) {
            return mop ? FactorPair{binom_neg(p.n, 1.0), binom_neg(p.m, -p.r)}
                       : FactorPair{binom_pos(p.n, 1.0), binom_pos(p.m, -p.r)};
          },
          [&](const JohanssonParams& p) {
            return mop ? FactorPair{binom_neg(p.M, p.t), binom_pos(p.N, p.t)}
                       : FactorPair{binom_pos(p.M, p.t), binom_neg(p.N, p.t)};
          },
          [&](const ConjectureParams& p) {
            std::vector<double> neg_s;
            for (double s : p.s) neg_s.push_back(-s);
            auto plus = product_poly(p.r);
            auto minus_inv = product_poly(neg_s);
            return mop ? FactorPair{reciprocal_series(plus), reciprocal_series(minus_inv)}
                       : FactorPair{poly_series(plus), poly_series(minus_inv)};
          },
      },
      sym.params());
}

struct SeriesValue {
  double value;
  double error;
};

SeriesValue convolve_at(FactorPair& fp, int p) {
  const int b0 = std::max(0, -p);
  std::optional<int> b1;
  if (fp.b.degree()) b1 = *fp.b.degree();
  if (fp.a.degree()) b1 = std::min(b1.value_or(INT32_MAX), *fp.a.degree() - p);
  double sum = 0.0, abs_sum = 0.0;
  if (b1) {
    for (int b = b0; b <= *b1; ++b) {
      const double t = fp.a[p + b] * fp.b[b];
      sum += t;
      abs_sum += std::abs(t);
    }
    return {sum, 4.0 * kEps * abs_sum * std::max(1, *b1 - b0 + 1)};
  }
  constexpr int kWindow = 8;
  constexpr int kMaxTerms = 400000;
  std::vector<double> recent;
  for (int b = b0; b < b0 + kMaxTerms; ++b) {
    const double t = fp.a[p + b] * fp.b[b];
    sum += t;
    abs_sum += std::abs(t);
    recent.push_back(std::abs(t));
    const int cnt = static_cast<int>(recent.size());
    if (cnt <= kWindow) continue;
    // Geometric majorant from the largest consecutive ratio in the window.
    double q = 0.0;
    bool ok = true;
    for (int i = cnt - kWindow; i < cnt; ++i) {
      if (recent[i - 1] == 0.0) {
        if (recent[i] != 0.0) ok = false;
        continue;
      }
      q = std::max(q, recent[i] / recent[i - 1]);
    }
    if (!ok || q >= 0.95) continue;
    const double tail = recent.back() * q / (1.0 - q);
    if (tail <= 1e-3 * kEps * std::max(abs_sum, 1e-300) || tail == 0.0) {
      const double round = 4.0 * kEps * abs_sum * std::log2(cnt + 1.0);
      return {sum, tail + round};
    }
  }
  throw ConvergenceError("laurent_coeffs: series convolution did not converge at index " +
                             std::to_string(p),
                         INFINITY);
}

double quadrature_radius(const Annulus& a) {
  if (a.inner > 0.0 && std::isfinite(a.outer)) return std::sqrt(a.inner * a.outer);
  if (a.inner > 0.0) return std::max(1.0, 2.0 * a.inner);
  if (std::isfinite(a.outer)) return std::min(1.0, 0.5 * a.outer);
  return 1.0;
}

CoeffTable circle_quadrature(const SymbolSpec& sym, Ratio ratio, int lo, int hi, double tol) {
  const double rho = quadrature_radius(analyticity_annulus(sym));
  const int span = std::max(std::abs(lo), std::abs(hi));
  int N = 64;
  while (N < 4 * span + 64) N *= 2;
  auto evaluate = [&](int nodes, double& rounding) {
    std::vector<std::complex<double>> F(nodes);
    double fmax = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const auto z = std::polar(rho, 2.0 * std::numbers::pi * j / nodes);
      F[j] = ratio_value(sym, ratio, z);
      fmax = std::max(fmax, std::abs(F[j]));
    }
    std::vector<double> c(hi - lo + 1);
    rounding = 0.0;
    for (int k = lo; k <= hi; ++k) {
      std::complex<double> s = 0.0;
      for (int j = 0; j < nodes; ++j) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(j) * k) % nodes) / nodes;
        s += F[j] * std::polar(1.0, ang);
      }
      const double scale = std::pow(rho, -static_cast<double>(k));
      c[k - lo] = (s.real() / nodes) * scale;
      rounding = std::max(rounding, 8.0 * kEps * fmax * scale);
    }
    return c;
  };
  double round1 = 0.0, round2 = 0.0;
  auto prev = evaluate(N, round1);
  for (int iter = 0; iter < 8; ++iter) {
    auto cur = evaluate(2 * N, round2);
    double diff = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) diff = std::max(diff, std::abs(cur[i] - prev[i]));
    const double err = diff + round2;
    if (err <= tol || iter == 7) {
      if (err > tol)
        throw ConvergenceError("laurent_coeffs: circle quadrature error estimate " +
                                   num_str(err) + " above tolerance",
                               err);
      CoeffTable t;
      t.ratio = ratio;
      t.index_lo = lo;
      t.index_hi = hi;
      t.values = std::move(cur);
      t.tail_bound = err;
      t.method = CoeffMethod::CircleQuadrature;
      return t;
    }
    prev = std::move(cur);
    N *= 2;
  }
  throw ConvergenceError("laurent_coeffs: circle quadrature did not converge", INFINITY);
}

}  // namespace

SymbolSpec make_symbol(SymbolParams params) {
  std::visit(
      Overloaded{
          [](const ExponentialParams& p) {
            if (!finite_nonneg(p.t)) throw ArgumentError("exponential symbol: t must be >= 0");
          },
          [](const GrowthSymbolParams& p) {
            if (p.n < 1 || p.m < 1) throw ArgumentError("growth symbol: n and m must be >= 1");
            if (!finite_nonneg(p.r))
              throw ArgumentError("growth symbol: r must be >= 0");
            if (p.r >= 1.0)
              throw ArgumentError("growth symbol: r >= 1 leaves no annulus of analyticity");
          },
          [](const JohanssonParams& p) {
            if (p.M < 1 || p.N < 1) throw ArgumentError("johansson symbol: M and N must be >= 1");
            if (!finite_nonneg(p.t)) throw ArgumentError("johansson symbol: t must be >= 0");
            if (p.t >= 1.0) throw ArgumentError("johansson symbol: t must be < 1");
          },
          [](const ConjectureParams& p) {
            double rmax = 0.0, smax = 0.0;
            for (double r : p.r) {
              if (!finite_nonneg(r)) throw ArgumentError("conjecture symbol: r_i must be >= 0");
              rmax = std::max(rmax, r);
            }
            for (double s : p.s) {
              if (!finite_nonneg(s)) throw ArgumentError("conjecture symbol: s_j must be >= 0");
              if (s >= 1.0) throw ArgumentError("conjecture symbol: s_j must be < 1");
              smax = std::max(smax, s);
            }
            if (rmax * smax >= 1.0)
              throw ArgumentError("conjecture symbol: max r_i * max s_j >= 1 leaves no annulus");
          },
      },
      params);
  return SymbolSpec(std::move(params));
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exp";
    case Family::Growth: return "growth";
    case Family::Johansson: return "johansson";
    case Family::ConjectureProduct: return "conjecture";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "exp" || name == "exponential") return Family::Exponential;
  if (name == "growth") return Family::Growth;
  if (name == "johansson") return Family::Johansson;
  if (name == "conjecture" || name == "product") return Family::ConjectureProduct;
  throw ArgumentError("unknown family '" + name + "'");
}

std::string describe(const SymbolSpec& sym) {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const ExponentialParams& p) { os << "exp(t=" << p.t << ")"; },
                 [&](const GrowthSymbolParams& p) {
                   os << "growth(n=" << p.n << ", m=" << p.m << ", r=" << p.r << ")";
                 },
                 [&](const JohanssonParams& p) {
                   os << "johansson(M=" << p.M << ", N=" << p.N << ", t=" << p.t << ")";
                 },
                 [&](const ConjectureParams& p) {
                   os << "conjecture(r=[";
                   for (std::size_t i = 0; i < p.r.size(); ++i) os << (i ? "," : "") << p.r[i];
                   os << "], s=[";
                   for (std::size_t i = 0; i < p.s.size(); ++i) os << (i ? "," : "") << p.s[i];
                   os << "])";
                 },
             },
             sym.params());
  return os.str();
}

Annulus analyticity_annulus(const SymbolSpec& sym) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{
          [&](const ExponentialParams&) { return Annulus{0.0, inf}; },
          [&](const GrowthSymbolParams& p) { return Annulus{p.r, 1.0}; },
          [&](const JohanssonParams& p) {
            return p.t == 0.0 ? Annulus{0.0, inf} : Annulus{p.t, 1.0 / p.t};
          },
          [&](const ConjectureParams& p) {
            double rmax = 0.0, smax = 0.0;
            for (double r : p.r) rmax = std::max(rmax, r);
            for (double s : p.s) smax = std::max(smax, s);
            return Annulus{smax, rmax == 0.0 ? inf : 1.0 / rmax};
          },
      },
      sym.params());
}

std::complex<double> ratio_value(const SymbolSpec& sym, Ratio ratio, std::complex<double> z) {
  using C = std::complex<double>;
  // log(phi_-/phi_+)
  const C lg = std::visit(
      Overloaded{
          [&](const ExponentialParams& p) { return C(p.t) * (z - 1.0 / z); },
          [&](const GrowthSymbolParams& p) {
            return -static_cast<double>(p.n) * std::log(1.0 + z) -
                   static_cast<double>(p.m) * std::log(1.0 - p.r / z);
          },
          [&](const JohanssonParams& p) {
            return static_cast<double>(p.N) * std::log(1.0 + p.t / z) -
                   static_cast<double>(p.M) * std::log(1.0 + p.t * z);
          },
          [&](const ConjectureParams& p) {
            C acc = 0.0;
            for (double s : p.s) acc -= std::log(1.0 - s / z);
            for (double r : p.r) acc -= std::log(1.0 + r * z);
            return acc;
          },
      },
      sym.params());
  return std::exp(ratio == Ratio::MinusOverPlus ? lg : -lg);
}

std::optional<int> plus_over_minus_min_power(const SymbolSpec& sym) {
  return std::visit(Overloaded{
                        [](const ExponentialParams&) -> std::optional<int> { return std::nullopt; },
                        [](const GrowthSymbolParams& p) -> std::optional<int> {
                          return p.r == 0.0 ? 0 : p.m;
                        },
                        [](const JohanssonParams& p) -> std::optional<int> {
                          return p.t == 0.0 ? std::optional<int>(0) : std::nullopt;
                        },
                        [](const ConjectureParams& p) -> std::optional<int> {
                          return static_cast<int>(
                              std::count_if(p.s.begin(), p.s.end(), [](double s) { return s != 0.0; }));
                        },
                    },
                    sym.params());
}

CoeffMethod default_method(const SymbolSpec& sym) {
  switch (sym.family()) {
    case Family::Exponential:
    case Family::Growth: return CoeffMethod::ClosedForm;
    default: return CoeffMethod::SeriesConvolution;
  }
}

std::string ratio_name(Ratio r) {
  return r == Ratio::MinusOverPlus ? "minus_over_plus" : "plus_over_minus";
}

std::string method_name(CoeffMethod m) {
  switch (m) {
    case CoeffMethod::ClosedForm: return "closed_form";
    case CoeffMethod::SeriesConvolution: return "series_convolution";
    case CoeffMethod::CircleQuadrature: return "circle_quadrature";
  }
  return "?";
}

CoeffTable laurent_coeffs(const SymbolSpec& sym, Ratio ratio, int index_lo, int index_hi,
                          std::optional<CoeffMethod> method, double tol) {
  if (index_lo > index_hi) throw ArgumentError("laurent_coeffs: index_lo > index_hi");
  if (!(tol > 0.0)) throw ArgumentError("laurent_coeffs: tol must be > 0");
  const CoeffMethod how = method.value_or(default_method(sym));
  CoeffTable t;
  t.ratio = ratio;
  t.index_lo = index_lo;
  t.index_hi = index_hi;
  t.method = how;

  if (how == CoeffMethod::CircleQuadrature)
    return circle_quadrature(sym, ratio, index_lo, index_hi, tol);

  if (how == CoeffMethod::ClosedForm) {
    if (sym.family() == Family::Exponential) {
      const double t2 = 2.0 * sym.as<ExponentialParams>().t;
      const int kmax = std::max(std::abs(index_lo), std::abs(index_hi));
      const auto J = bessel_j_sequence(kmax, t2);
      for (int k = index_lo; k <= index_hi; ++k) {
        // MinusOverPlus at k and PlusOverMinus at -k are both J_k(2t).
        const int idx = ratio == Ratio::MinusOverPlus ? k : -k;
        const double v = J[std::abs(idx)];
        t.values.push_back(idx < 0 && (idx % 2 != 0) ? -v : v);
      }
      t.tail_bound = 1e-14;
      return t;
    }
    if (sym.family() == Family::Growth) {
      const auto& p = sym.as<GrowthSymbolParams>();
      GrowthExact ge(p.n, p.m, p.r);
      t.values = ratio == Ratio::MinusOverPlus ? ge.minus_over_plus(index_lo, index_hi)
                                               : ge.plus_over_minus(index_lo, index_hi);
      double vmax = 0.0;
      for (double v : t.values) vmax = std::max(vmax, std::abs(v));
      t.tail_bound = vmax * kEps;
      return t;
    }
    throw ArgumentError("laurent_coeffs: no closed form for family " + family_name(sym.family()));
  }

  FactorPair fp = factor_pair(sym, ratio);
  for (int k = index_lo; k <= index_hi; ++k) {
    const auto sv = convolve_at(fp, k);
    t.values.push_back(sv.value);
    t.tail_bound = std::max(t.tail_bound, sv.error);
  }
  if (t.tail_bound > tol)
    throw ConvergenceError("laurent_coeffs: error estimate " + num_str(t.tail_bound) +
                               " above tolerance",
                           t.tail_bound);
  return t;
}

}  // namespace fredholm
