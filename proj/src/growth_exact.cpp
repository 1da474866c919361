#include "fredholm/growth_exact.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <string>

#include "fredholm/errors.hpp"

namespace fredholm {
namespace {

constexpr long kNegInf = LONG_MIN / 4;
constexpr long kGoodBits = 64;
constexpr long kMaxPrecision = 1L << 18;

class Mp {
 public:
  explicit Mp(mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Mp(const Mp& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Mp(Mp&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  Mp& operator=(const Mp& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Mp& operator=(Mp&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Mp() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

class Mpz {
 public:
  Mpz() { mpz_init(v_); }
  ~Mpz() { mpz_clear(v_); }
  Mpz(const Mpz&) = delete;
  Mpz& operator=(const Mpz&) = delete;
  mpz_ptr get() { return v_; }

 private:
  mpz_t v_;
};

long exponent(const Mp& x) {
  return mpfr_zero_p(x.get()) ? kNegInf : static_cast<long>(mpfr_get_exp(x.get()));
}

long log2_ceil(long count) {
  long b = 0;
  while ((1L << b) < count) ++b;
  return b;
}

// A multiprecision value with an absolute error bound 2^err.
struct Val {
  Mp v;
  long err;
  long mag;  // exponent of the sum of absolute terms
};

void set_binomial(Mp& out, long a, long b) {
  Mpz z;
  if (b < 0 || b > a) {
    mpfr_set_zero(out.get(), 1);
    return;
  }
  mpz_bin_uiui(z.get(), static_cast<unsigned long>(a), static_cast<unsigned long>(b));
  mpfr_set_z(out.get(), z.get(), MPFR_RNDN);
}

// Sum accumulator tracking the largest term exponent.
struct Accum {
  Mp sum;
  long max_exp = kNegInf;
  long max_err = kNegInf;
  long count = 0;
  explicit Accum(mpfr_prec_t p) : sum(p) {}
  void add(const Mp& term, long term_err = kNegInf) {
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    max_exp = std::max(max_exp, exponent(term));
    max_err = std::max(max_err, term_err);
    ++count;
  }
  // Rounding from the additions plus propagated term errors.
  long error(mpfr_prec_t p) const {
    const long lg = log2_ceil(std::max<long>(count, 1)) + 2;
    const long round = max_exp == kNegInf ? kNegInf : max_exp - static_cast<long>(p) + lg;
    const long prop = max_err == kNegInf ? kNegInf : max_err + lg;
    return std::max(round, prop);
  }
};

struct Engine {
  int n, m;
  double r;
  mpfr_prec_t prec;
  Mp rr, y, inv_pow_n, inv_pow_m;

  Engine(int n_, int m_, double r_, mpfr_prec_t p)
      : n(n_), m(m_), r(r_), prec(p), rr(p), y(p), inv_pow_n(p), inv_pow_m(p) {
    mpfr_set_d(rr.get(), r, MPFR_RNDN);
    Mp one_plus(p);
    mpfr_add_ui(one_plus.get(), rr.get(), 1, MPFR_RNDN);
    mpfr_div(y.get(), rr.get(), one_plus.get(), MPFR_RNDN);
    mpfr_pow_si(inv_pow_n.get(), one_plus.get(), -n, MPFR_RNDN);
    mpfr_pow_si(inv_pow_m.get(), one_plus.get(), -m, MPFR_RNDN);
  }

  Val finish(Accum& acc, const Mp& prefactor) const {
    Val out{Mp(prec), kNegInf, kNegInf};
    mpfr_mul(out.v.get(), acc.sum.get(), prefactor.get(), MPFR_RNDN);
    const long pe = exponent(prefactor);
    if (pe == kNegInf) return out;  // exact zero
    const long e = acc.error(prec);
    out.err = std::max(e == kNegInf ? kNegInf : e + pe,
                       exponent(out.v) == kNegInf ? kNegInf
                                                  : exponent(out.v) - static_cast<long>(prec) + 2);
    out.mag = acc.max_exp == kNegInf ? kNegInf : acc.max_exp + pe + log2_ceil(acc.count);
    return out;
  }

  // (phi_-/phi_+)_p.
  Val f(long p) const {
    Accum acc(prec);
    Mp term(prec), pref(prec);
    mpfr_set_ui(term.get(), 1, MPFR_RNDN);
    if (p >= 0) {
      acc.add(term);
      for (long l = 0; l + 1 < n; ++l) {
        mpfr_mul_si(term.get(), term.get(), (l + 1 - n) * (m + l), MPFR_RNDN);
        mpfr_mul(term.get(), term.get(), y.get(), MPFR_RNDN);
        mpfr_div_si(term.get(), term.get(), (p + 1 + l) * (l + 1), MPFR_RNDN);
        if (mpfr_zero_p(term.get())) break;
        acc.add(term);
      }
      set_binomial(pref, n + p - 1, p);
      mpfr_mul(pref.get(), pref.get(), inv_pow_m.get(), MPFR_RNDN);
      if (p % 2 == 1) mpfr_neg(pref.get(), pref.get(), MPFR_RNDN);
    } else {
      const long q = -p;
      acc.add(term);
      for (long l = 0; l + 1 < m; ++l) {
        mpfr_mul_si(term.get(), term.get(), (n + l) * (l + 1 - m), MPFR_RNDN);
        mpfr_mul(term.get(), term.get(), y.get(), MPFR_RNDN);
        mpfr_div_si(term.get(), term.get(), (q + 1 + l) * (l + 1), MPFR_RNDN);
        if (mpfr_zero_p(term.get())) break;
        acc.add(term);
      }
      set_binomial(pref, m + q - 1, q);
      Mp rq(prec);
      mpfr_pow_ui(rq.get(), rr.get(), static_cast<unsigned long>(q), MPFR_RNDN);
      mpfr_mul(pref.get(), pref.get(), rq.get(), MPFR_RNDN);
      mpfr_mul(pref.get(), pref.get(), inv_pow_n.get(), MPFR_RNDN);
    }
    return finish(acc, pref);
  }

  // (phi_+/phi_-)_q = sum_b C(n, q+b) C(m, b) (-r)^b.
  Val g(long q) const {
    const long b0 = std::max<long>(0, -q);
    const long b1 = std::min<long>(m, n - q);
    Accum acc(prec);
    Mp one(prec);
    mpfr_set_ui(one.get(), 1, MPFR_RNDN);
    if (b0 > b1) return finish(acc, one);
    Mp term(prec), tmp(prec);
    set_binomial(term, n, q + b0);
    set_binomial(tmp, m, b0);
    mpfr_mul(term.get(), term.get(), tmp.get(), MPFR_RNDN);
    mpfr_pow_ui(tmp.get(), rr.get(), static_cast<unsigned long>(b0), MPFR_RNDN);
    mpfr_mul(term.get(), term.get(), tmp.get(), MPFR_RNDN);
    if (b0 % 2 == 1) mpfr_neg(term.get(), term.get(), MPFR_RNDN);
    acc.add(term);
    for (long b = b0; b < b1; ++b) {
      mpfr_mul_si(term.get(), term.get(), (n - q - b) * (m - b), MPFR_RNDN);
      mpfr_mul(term.get(), term.get(), rr.get(), MPFR_RNDN);
      mpfr_neg(term.get(), term.get(), MPFR_RNDN);
      mpfr_div_si(term.get(), term.get(), (q + b + 1) * (b + 1), MPFR_RNDN);
      if (mpfr_zero_p(term.get())) break;
      acc.add(term);
    }
    return finish(acc, one);
  }

  // Product of two values with propagated error.
  void product(const Val& a, const Val& b, Mp& out, long& err) const {
    mpfr_mul(out.get(), a.v.get(), b.v.get(), MPFR_RNDN);
    const long ea = exponent(a.v), eb = exponent(b.v);
    long e = kNegInf;
    if (a.err != kNegInf && eb != kNegInf) e = std::max(e, a.err + eb + 1);
    if (b.err != kNegInf && ea != kNegInf) e = std::max(e, b.err + ea + 1);
    if (a.err != kNegInf && b.err != kNegInf) e = std::max(e, a.err + b.err + 1);
    err = e;
  }
};

// Surviving bits of a computed value; exact zeros count as fully accurate
// when the error bound is 200 bits below the size of the summed terms.
long good_bits(const Val& v) {
  if (v.err == kNegInf) return LONG_MAX;
  const long e = exponent(v.v);
  if (e == kNegInf) return (v.mag != kNegInf && v.err < v.mag - 200) ? LONG_MAX : LONG_MIN;
  return e - v.err;
}

double to_double(const Mp& v, const char* what) {
  const double d = mpfr_get_d(v.get(), MPFR_RNDN);
  if (!std::isfinite(d))
    throw ConvergenceError(std::string(what) + ": value exceeds the double range", INFINITY);
  return d;
}

// Runs body(prec) -> min good bits, raising precision until kGoodBits survive.
template <class Body>
long adaptive(long start, Body&& body) {
  long prec = std::max<long>(start, 128);
  for (;;) {
    const long good = body(prec);
    if (good >= kGoodBits) return prec;
    long next = 2 * prec;
    if (good != LONG_MIN) next = std::max(next / 2 + (kGoodBits - good) + 64, prec + 64);
    if (next > kMaxPrecision)
      throw ConvergenceError("growth coefficients: precision cap of " +
                                 std::to_string(kMaxPrecision) + " bits reached",
                             static_cast<double>(good));
    prec = next;
  }
}

}  // namespace

GrowthExact::GrowthExact(int n, int m, double r) : n_(n), m_(m), r_(r) {
  if (n < 1 || m < 1) throw ArgumentError("growth symbol: n and m must be >= 1");
  if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("growth symbol: r must lie in [0, 1)");
}

std::vector<double> GrowthExact::minus_over_plus(int lo, int hi) const {
  if (lo > hi) return {};
  std::vector<double> out(hi - lo + 1);
  last_prec_ = adaptive(128 + (n_ + m_) / 2, [&](long prec) {
    Engine eng(n_, m_, r_, prec);
    long good = LONG_MAX;
    for (int p = lo; p <= hi; ++p) {
      Val v = eng.f(p);
      good = std::min(good, good_bits(v));
      out[p - lo] = to_double(v.v, "minus_over_plus");
    }
    return good;
  });
  return out;
}

std::vector<double> GrowthExact::plus_over_minus(int lo, int hi) const {
  if (lo > hi) return {};
  std::vector<double> out(hi - lo + 1);
  last_prec_ = adaptive(128 + (n_ + m_) / 2, [&](long prec) {
    Engine eng(n_, m_, r_, prec);
    long good = LONG_MAX;
    for (int q = lo; q <= hi; ++q) {
      Val v = eng.g(q);
      good = std::min(good, good_bits(v));
      out[q - lo] = to_double(v.v, "plus_over_minus");
    }
    return good;
  });
  return out;
}

namespace {

// K(offset + a, offset + b) at the engine's precision, row-major; `good` is
// lowered to the fewest surviving bits over all entries.
std::vector<Mp> section_values(const Engine& eng, int n, int m, int offset, int rows, int cols,
                               long& good) {
  const mpfr_prec_t prec = eng.prec;
  // k ranges over [max(1, -j - n), m - j]; p = i + k, q = -k - j.
  const int jmax = offset + cols - 1;
  const int p_lo = offset + 1 + std::max(0, -jmax - n - 1);
  const int p_hi = offset + rows - 1 + m - offset;
  const int q_lo = -m;
  const int q_hi = std::min(n, -offset - 1);
  std::vector<Val> f, g;
  f.reserve(std::max(0, p_hi - p_lo + 1));
  for (int p = p_lo; p <= p_hi; ++p) f.push_back(eng.f(p));
  g.reserve(std::max(0, q_hi - q_lo + 1));
  for (int q = q_lo; q <= q_hi; ++q) g.push_back(eng.g(q));
  std::vector<Mp> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  Mp prod(prec);
  for (int a = 0; a < rows; ++a) {
    const int i = offset + a;
    for (int b = 0; b < cols; ++b) {
      const int j = offset + b;
      const int k_lo = std::max(1, -j - n);
      const int k_hi = m - j;
      Accum acc(prec);
      for (int k = k_lo; k <= k_hi; ++k) {
        const int p = i + k, q = -k - j;
        if (p < p_lo || p > p_hi || q < q_lo || q > q_hi) continue;
        long err;
        eng.product(f[p - p_lo], g[q - q_lo], prod, err);
        acc.add(prod, err);
      }
      Val entry{acc.sum, acc.error(prec),
                acc.max_exp == kNegInf ? kNegInf : acc.max_exp + log2_ceil(acc.count)};
      good = std::min(good, good_bits(entry));
      out.push_back(std::move(entry.v));
    }
  }
  return out;
}

// det(I - v K) by LU with partial pivoting, all in working precision.
Mp lu_det(std::vector<Mp> A, int rows, double v, mpfr_prec_t prec) {
  for (auto& x : A) mpfr_mul_d(x.get(), x.get(), -v, MPFR_RNDN);
  for (int i = 0; i < rows; ++i) mpfr_add_ui(A[i * rows + i].get(), A[i * rows + i].get(), 1, MPFR_RNDN);
  Mp det(prec), factor(prec), tmp(prec);
  mpfr_set_ui(det.get(), 1, MPFR_RNDN);
  for (int c = 0; c < rows; ++c) {
    int piv = c;
    for (int r = c + 1; r < rows; ++r)
      if (mpfr_cmpabs(A[r * rows + c].get(), A[piv * rows + c].get()) > 0) piv = r;
    if (mpfr_zero_p(A[piv * rows + c].get())) {
      mpfr_set_zero(det.get(), 1);
      return det;
    }
    if (piv != c) {
      for (int k = 0; k < rows; ++k) std::swap(A[c * rows + k], A[piv * rows + k]);
      mpfr_neg(det.get(), det.get(), MPFR_RNDN);
    }
    const Mp& p = A[c * rows + c];
    mpfr_mul(det.get(), det.get(), p.get(), MPFR_RNDN);
    for (int r = c + 1; r < rows; ++r) {
      if (mpfr_zero_p(A[r * rows + c].get())) continue;
      mpfr_div(factor.get(), A[r * rows + c].get(), p.get(), MPFR_RNDN);
      for (int k = c + 1; k < rows; ++k) {
        mpfr_mul(tmp.get(), factor.get(), A[c * rows + k].get(), MPFR_RNDN);
        mpfr_sub(A[r * rows + k].get(), A[r * rows + k].get(), tmp.get(), MPFR_RNDN);
      }
    }
  }
  return det;
}

}  // namespace

Eigen::MatrixXd GrowthExact::section(int offset, int rows, int cols) const {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rows, cols);
  if (rows <= 0 || cols <= 0) return K;
  last_prec_ = adaptive(128 + n_ + m_, [&](long prec) {
    Engine eng(n_, m_, r_, prec);
    long good = LONG_MAX;
    const auto vals = section_values(eng, n_, m_, offset, rows, cols, good);
    for (int a = 0; a < rows; ++a)
      for (int b = 0; b < cols; ++b) K(a, b) = to_double(vals[a * cols + b], "kernel entry");
    return good;
  });
  return K;
}

ExactDet GrowthExact::det(int offset, double v) const {
  ExactDet out;
  const int rows = std::max(m_ - offset, 0);
  if (rows == 0 || v == 0.0) return out;
  long prec = 128 + n_ + m_;
  std::optional<Mp> prev;
  for (;;) {
    if (prec > kMaxPrecision)
      throw ConvergenceError("growth determinant: precision cap of " + std::to_string(kMaxPrecision) +
                             " bits reached");
    Engine eng(n_, m_, r_, prec);
    long good = LONG_MAX;
    auto vals = section_values(eng, n_, m_, offset, rows, rows, good);
    if (good < kGoodBits) {
      prev.reset();
      prec += std::max<long>(64, kGoodBits - good + 64);
      continue;
    }
    Mp d = lu_det(std::move(vals), rows, v, prec);
    if (prev) {
      // Accept once doubling the precision moves the result by < 2^-60 relative.
      Mp diff(prec);
      mpfr_sub(diff.get(), d.get(), prev->get(), MPFR_RNDN);
      const bool both_zero = mpfr_zero_p(d.get()) && mpfr_zero_p(prev->get());
      if (both_zero || (!mpfr_zero_p(d.get()) && exponent(diff) <= exponent(d) - 60)) {
        last_prec_ = prec;
        out.precision = prec;
        out.sign = mpfr_sgn(d.get()) > 0 ? 1 : (mpfr_sgn(d.get()) < 0 ? -1 : 0);
        out.value = mpfr_get_d(d.get(), MPFR_RNDN);
        if (out.sign == 0) {
          out.log_abs = -INFINITY;
        } else {
          Mp lg(prec);
          mpfr_abs(lg.get(), d.get(), MPFR_RNDN);
          mpfr_log(lg.get(), lg.get(), MPFR_RNDN);
          out.log_abs = mpfr_get_d(lg.get(), MPFR_RNDN);
        }
        return out;
      }
    }
    prev = std::move(d);
    prec *= 2;
  }
}

double GrowthExact::trace(int offset) const {
  double result = 0.0;
  last_prec_ = adaptive(128 + n_ + m_, [&](long prec) {
    Engine eng(n_, m_, r_, prec);
    Accum acc(prec);
    Mp prod(prec);
    for (long q = offset + 1; q <= m_; ++q) {
      if (-q > n_) continue;
      long err;
      eng.product(eng.f(q), eng.g(-q), prod, err);
      mpfr_mul_si(prod.get(), prod.get(), q - offset, MPFR_RNDN);
      acc.add(prod, err == kNegInf ? kNegInf : err + log2_ceil(q - offset + 1));
    }
    Val tr{acc.sum, acc.error(prec),
           acc.max_exp == kNegInf ? kNegInf : acc.max_exp + log2_ceil(acc.count)};
    result = to_double(tr.v, "trace");
    return good_bits(tr);
  });
  return result;
}

}  // namespace fredholm
