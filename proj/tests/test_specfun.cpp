#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/specfun.hpp"

using namespace fredholm;

namespace {

// Plain power series for J_k(x), long double; only trusted for small x.
long double series_j(int k, long double x) {
  long double term = 1.0L;
  for (int i = 1; i <= k; ++i) term *= x / 2 / i;
  long double sum = term;
  for (int j = 1; j < 200; ++j) {
    term *= -(x * x / 4) / (static_cast<long double>(j) * (j + k));
    sum += term;
  }
  return sum;
}

// int_1^u sqrt(1 - t^-2) dt in closed form.
double psi_integral(double u) { return std::sqrt(u * u - 1.0) - std::acos(1.0 / u); }

}  // namespace

TEST_CASE("bessel_j trivial values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(3, 0.0) == 0.0);
  CHECK(bessel_j(1, 2.0) == doctest::Approx(0.5767248078).epsilon(1e-10));
  CHECK(std::abs(bessel_j(1, 2.0) - static_cast<double>(series_j(1, 2.0L))) < 1e-15);
}

TEST_CASE("bessel_j matches an independent evaluator") {
  double worst = 0.0;
  for (int k : {0, 1, 2, 5, 10, 25, 50, 100, 200})
    for (double x : {0.1, 1.0, 3.7, 10.0, 12.0, 25.5, 40.0, 80.0, 100.0}) {
      const double ref = boost::math::cyl_bessel_j(k, x);
      worst = std::max(worst, std::abs(bessel_j(k, x) - ref));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("bessel_j at large order and argument") {
  for (auto [k, x] : {std::pair{1000, 1000.0}, {5000, 4000.0}, {100000, 100000.0}, {20, 100000.0}}) {
    const double ref = boost::math::cyl_bessel_j(k, x);
    CHECK(std::abs(bessel_j(k, x) - ref) <= 1e-12);
  }
  const auto e = bessel_j_eval(5000, 10.0);
  CHECK(e.value == 0.0);
  CHECK(e.underflow);
}

TEST_CASE("bessel sequence: bound, recurrence and normalization") {
  for (double x : {0.5, 7.0, 33.0, 100.0}) {
    const auto J = bessel_j_sequence(400, x);
    double norm = J[0] * J[0];
    for (int k = 1; k <= 400; ++k) norm += 2.0 * J[k] * J[k];
    CHECK(std::abs(norm - 1.0) <= 1e-10);
    for (int k = 1; k < 400; ++k) {
      CHECK(std::abs(J[k]) <= 1.0);
      if (std::abs(J[k]) > 1e-200) {
        const double res = J[k - 1] + J[k + 1] - 2.0 * k / x * J[k];
        CHECK(std::abs(res) <= 1e-10 * std::max({std::abs(J[k - 1]), std::abs(J[k + 1]), std::abs(J[k])}) * 2.0 * k / x + 1e-300);
      }
    }
  }
}

TEST_CASE("bessel_j rejects invalid input") {
  CHECK_THROWS_AS(bessel_j(-1, 1.0), ArgumentError);
  CHECK_THROWS_AS(bessel_j(1, -1.0), ArgumentError);
}

TEST_CASE("airy_ai values") {
  CHECK(airy_ai(0.0) == doctest::Approx(0.3550280539).epsilon(1e-10));
  CHECK(std::abs(airy_ai(-2.338107410459767)) < 1e-10);
  CHECK(airy_ai(10.0) < 1e-9);
  CHECK(airy_ai(10.0) > 0.0);
}

TEST_CASE("airy_ai matches an independent evaluator on [-20, 12]") {
  double worst = 0.0, worst_p = 0.0;
  for (double x = -20.0; x <= 12.0; x += 0.173) {
    worst = std::max(worst, std::abs(airy_ai(x) - boost::math::airy_ai(x)));
    worst_p = std::max(worst_p, std::abs(airy_ai_prime(x) - boost::math::airy_ai_prime(x)));
  }
  CHECK(worst <= 1e-10);
  CHECK(worst_p <= 1e-9);
}

TEST_CASE("airy switchover points agree from both sides") {
  for (double x : {6.0, -8.0}) {
    const double below = airy_ai(std::nextafter(x, -100.0));
    const double above = airy_ai(std::nextafter(x, 100.0));
    CHECK(std::abs(below - above) <= 1e-10);
  }
}

TEST_CASE("psi_map") {
  CHECK_THROWS_AS(psi_map(1.0), ArgumentError);
  CHECK(psi_map(1.0 + 1e-10) < 1e-6);
  CHECK(psi_map(3.0) > psi_map(2.0));
  const double ref = std::pow(1.5 * psi_integral(2.0), 2.0 / 3.0);
  CHECK(std::abs(psi_map(2.0) - ref) <= 1e-12);
  double prev = 0.0;
  for (double u = 2.0; u <= 50.0; u += 0.5) {
    const double p = psi_map(u);
    CHECK(p > prev);
    prev = p;
    const double ratio = p / std::pow(u, 2.0 / 3.0);
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
  const double h = 1e-6;
  CHECK(psi_map_derivative(1.7) == doctest::Approx((psi_map(1.7 + h) - psi_map(1.7 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("uniform Bessel approximation") {
  const auto a100 = bessel_uniform_approx(100, 1.2);
  const double j100 = bessel_j(100, 120.0);
  const double e100 = std::abs(a100.value - j100) / std::abs(j100);
  CHECK(e100 <= 5.0 / 100);
  const auto a200 = bessel_uniform_approx(200, 1.2);
  const double j200 = bessel_j(200, 240.0);
  const double e200 = std::abs(a200.value - j200) / std::abs(j200);
  CHECK(e200 < e100);
  CHECK_THROWS_AS(bessel_uniform_approx(5, 1.2), ArgumentError);
  // Find a u whose phase sits on -pi/4 + pi Z and confirm it is refused.
  double lo = 1.2, hi = 1.25;
  auto phase_offset = [](double u) {
    const double psi = psi_map(u);
    return 2.0 / 3.0 * 100 * psi * std::sqrt(psi) + std::numbers::pi / 4.0;
  };
  const double target = std::ceil(phase_offset(lo) / std::numbers::pi) * std::numbers::pi;
  REQUIRE(phase_offset(hi) > target);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phase_offset(mid) < target ? lo : hi) = mid;
  }
  CHECK_THROWS_AS(bessel_uniform_approx(100, lo), ArgumentError);
}
