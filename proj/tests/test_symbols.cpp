#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/symbols.hpp"

using namespace fredholm;
using boost::multiprecision::cpp_rational;

namespace {

// Coefficient of z^q in (1+z)^n (1 - r/z)^m with rational r, exactly.
cpp_rational poly_coeff(int n, int m, const cpp_rational& r, int q) {
  cpp_rational sum = 0;
  for (int b = 0; b <= m; ++b) {
    const int a = q + b;
    if (a < 0 || a > n) continue;
    cpp_rational term = boost::math::binomial_coefficient<double>(n, a) *
                        boost::math::binomial_coefficient<double>(m, b);
    cpp_rational pw = 1;
    for (int i = 0; i < b; ++i) pw *= -r;
    sum += term * pw;
  }
  return sum;
}

// Coefficient of z^p in (1+z)^{-n} (1 - r/z)^{-m} by direct summation.
long double growth_f(int n, int m, long double r, int p) {
  long double sum = 0;
  for (int b = 0; b < 4000; ++b) {
    const int a = p + b;
    if (a < 0) continue;
    const long double ca = std::exp(std::lgamma((long double)n + a) - std::lgamma((long double)a + 1) -
                                    std::lgamma((long double)n));
    const long double cb = std::exp(std::lgamma((long double)m + b) - std::lgamma((long double)b + 1) -
                                    std::lgamma((long double)m));
    sum += ((a % 2) ? -1.0L : 1.0L) * ca * cb * std::pow(r, (long double)b);
  }
  return sum;
}

double max_diff(const CoeffTable& a, const CoeffTable& b) {
  double d = 0.0;
  for (int k = a.index_lo; k <= a.index_hi; ++k) d = std::max(d, std::abs(a.at(k) - b.at(k)));
  return d;
}

}  // namespace

TEST_CASE("family validation") {
  CHECK_THROWS_AS(make_exponential(-1.0), ArgumentError);
  CHECK_THROWS_AS(make_growth_symbol(3, 2, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_growth_symbol(3, 2, -0.1), ArgumentError);
  CHECK_THROWS_AS(make_growth_symbol(0, 2, 0.5), ArgumentError);
  CHECK_THROWS_AS(make_johansson(2, 2, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_conjecture({-0.1}, {0.2}), ArgumentError);
  CHECK_THROWS_AS(make_conjecture({0.5}, {1.0}), ArgumentError);
  CHECK_THROWS_AS(make_conjecture({0.5, 3.0}, {0.4}), ArgumentError);
  CHECK_NOTHROW(make_conjecture({0.5, 1.5}, {0.4}));
  CHECK(parse_family("growth") == Family::Growth);
  CHECK_THROWS_AS(parse_family("nope"), ArgumentError);
  CHECK(family_name(Family::ConjectureProduct) == "conjecture");
}

TEST_CASE("exponential coefficients are Bessel values") {
  const double t = 1.3;
  const auto sym = make_exponential(t);
  for (Ratio ratio : {Ratio::MinusOverPlus, Ratio::PlusOverMinus}) {
    const auto closed = laurent_coeffs(sym, ratio, -12, 12);
    const auto quad = laurent_coeffs(sym, ratio, -12, 12, CoeffMethod::CircleQuadrature);
    const auto conv = laurent_coeffs(sym, ratio, -12, 12, CoeffMethod::SeriesConvolution);
    CHECK(max_diff(closed, quad) <= 1e-10);
    CHECK(max_diff(closed, conv) <= 1e-10);
    const int sign = ratio == Ratio::MinusOverPlus ? 1 : -1;
    for (int k = 0; k <= 12; ++k)
      CHECK(std::abs(closed.at(sign * k) - boost::math::cyl_bessel_j(k, 2 * t)) <= 1e-13);
  }
}

TEST_CASE("growth polynomial coefficients are exact") {
  const int n = 6, m = 5;
  const cpp_rational r(1, 4);
  const auto sym = make_growth_symbol(n, m, 0.25);
  const auto g = laurent_coeffs(sym, Ratio::PlusOverMinus, -m - 2, n + 2);
  for (int q = -m - 2; q <= n + 2; ++q)
    CHECK(g.at(q) == static_cast<double>(poly_coeff(n, m, r, q)));
  const auto conv = laurent_coeffs(sym, Ratio::PlusOverMinus, -m - 2, n + 2, CoeffMethod::SeriesConvolution);
  CHECK(max_diff(g, conv) <= 1e-12);
}

TEST_CASE("growth inverse coefficients against direct summation") {
  const int n = 5, m = 7;
  const double r = 0.3;
  const auto sym = make_growth_symbol(n, m, r);
  const auto f = laurent_coeffs(sym, Ratio::MinusOverPlus, -15, 15);
  for (int p = -15; p <= 15; ++p) {
    const double ref = static_cast<double>(growth_f(n, m, r, p));
    CHECK(std::abs(f.at(p) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
  const auto quad = laurent_coeffs(sym, Ratio::MinusOverPlus, -15, 15, CoeffMethod::CircleQuadrature, 1e-8);
  CHECK(max_diff(f, quad) <= 1e-8);
}

TEST_CASE("growth exact at large m survives cancellation") {
  GrowthExact ge(400, 400, 0.5);
  const auto g = ge.plus_over_minus(-3, 3);
  const auto f = ge.minus_over_plus(-3, 3);
  for (double v : g) CHECK(std::isfinite(v));
  for (double v : f) CHECK(std::isfinite(v));
  // (1+z)^n (1-r/z)^m at z = 1 is 2^n (1-r)^m = 1 here; the coefficients must sum to it.
  GrowthExact small(3, 3, 0.5);
  const auto all = small.plus_over_minus(-3, 3);
  double s = 0.0;
  for (double v : all) s += v;
  CHECK(s == doctest::Approx(8.0 * 0.125));
}

TEST_CASE("johansson and conjecture: convolution against quadrature") {
  for (const auto& sym : {make_johansson(3, 4, 0.4), make_conjecture({0.3, 0.7}, {0.5, 0.2, 0.6})}) {
    for (Ratio ratio : {Ratio::MinusOverPlus, Ratio::PlusOverMinus}) {
      const auto conv = laurent_coeffs(sym, ratio, -20, 20);
      const auto quad = laurent_coeffs(sym, ratio, -20, 20, CoeffMethod::CircleQuadrature);
      CHECK(conv.method == CoeffMethod::SeriesConvolution);
      CHECK(max_diff(conv, quad) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(laurent_coeffs(make_johansson(2, 2, 0.3), Ratio::MinusOverPlus, 0, 3, CoeffMethod::ClosedForm),
                  ArgumentError);
}

TEST_CASE("coefficients reconstruct the ratio on the unit circle") {
  const auto sym = make_conjecture({0.4}, {0.5, 0.3});
  const auto c = laurent_coeffs(sym, Ratio::MinusOverPlus, -120, 120);
  const std::complex<double> z = std::polar(1.0, 0.7);
  std::complex<double> sum = 0.0;
  for (int k = -120; k <= 120; ++k) sum += c.at(k) * std::pow(z, k);
  CHECK(std::abs(sum - ratio_value(sym, Ratio::MinusOverPlus, z)) <= 1e-10);
}

TEST_CASE("laurent polynomial detection") {
  CHECK(plus_over_minus_min_power(make_growth_symbol(4, 7, 0.5)) == 7);
  CHECK(plus_over_minus_min_power(make_growth_symbol(4, 7, 0.0)) == 0);
  CHECK(plus_over_minus_min_power(make_conjecture({0.2}, {0.1, 0.0, 0.3})) == 2);
  CHECK_FALSE(plus_over_minus_min_power(make_exponential(1.0)).has_value());
  const auto a = analyticity_annulus(make_conjecture({0.5}, {0.4}));
  CHECK(a.inner == doctest::Approx(0.4));
  CHECK(a.outer == doctest::Approx(2.0));
}

TEST_CASE("trivial symbols") {
  const auto e = laurent_coeffs(make_exponential(0.0), Ratio::MinusOverPlus, -5, 5);
  for (int k = -5; k <= 5; ++k) CHECK(e.at(k) == (k == 0 ? 1.0 : 0.0));
  CHECK(laurent_coeffs(make_growth_symbol(2, 1, 0.5), Ratio::PlusOverMinus, 0, 0).at(0) == 0.0);
  const auto z = laurent_coeffs(make_growth_symbol(3, 2, 0.0), Ratio::MinusOverPlus, -6, -1);
  for (double v : z.values) CHECK(v == 0.0);
  CHECK_THROWS_AS(make_growth_symbol(4, 4, 1.2), ArgumentError);
  CHECK_NOTHROW(make_conjecture({1.0, 0.5}, {0.3}));
}
