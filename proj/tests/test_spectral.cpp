#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "fredholm/errors.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/symbols.hpp"

using namespace fredholm;

namespace {

// Gessel: P(lambda_1 <= n) = e^{-t^2} det[I_{j-k}(2t)]_{j,k<n}.
double gessel(int n, double t) {
  Eigen::MatrixXd T(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) T(j, k) = boost::math::cyl_bessel_i(std::abs(j - k), 2 * t);
  return std::exp(-t * t) * T.determinant();
}

}  // namespace

TEST_CASE("determinant matches the Toeplitz identity") {
  for (double t : {0.5, 1.0, 2.0, 3.0})
    for (int n = 1; n <= 8; ++n) {
      const auto d = fredholm_det(build_kernel(make_exponential(t), n, 0, 1e-14));
      CHECK(std::abs(d.value - gessel(n, t)) <= 1e-10);
      CHECK(d.stability_delta <= 1e-12);
    }
}

TEST_CASE("spectrum of the exponential kernel lies in [0, 1)") {
  const auto km = build_kernel(make_exponential(3.0), 2);
  const auto rep = spectrum(km);
  CHECK(rep.solver == "symmetrized");
  CHECK(rep.in_unit_interval);
  CHECK_FALSE(rep.counterexample_candidate);
  CHECK(rep.lemma1_holds);
  CHECK(rep.trace == doctest::Approx(bessel_trace(2, 3.0)).epsilon(1e-12));
  double sum = 0.0;
  for (auto l : rep.eigenvalues) sum += l.real();
  CHECK(sum == doctest::Approx(rep.trace).epsilon(1e-10));
}

TEST_CASE("v-derivatives against finite differences") {
  for (const auto& sym : {make_exponential(1.5), make_growth_symbol(12, 10, 0.5)}) {
    const auto km = build_kernel(sym, 1);
    const auto d = det_v_derivatives(km, 3);
    const double h = 1e-3;
    auto D = [&](double v) { return fredholm_det_value(km, v); };
    CHECK(d[0] == doctest::Approx(D(1.0)).epsilon(1e-12));
    const double d1 = (D(1 + h) - D(1 - h)) / (2 * h);
    const double d2 = (D(1 + h) - 2 * D(1) + D(1 - h)) / (h * h);
    const double d3 = (D(1 + 2 * h) - 2 * D(1 + h) + 2 * D(1 - h) - D(1 - 2 * h)) / (2 * h * h * h);
    CHECK(std::abs(d[1] - d1) <= 1e-5 * std::max(1.0, std::abs(d1)));
    CHECK(std::abs(d[2] - d2) <= 1e-4 * std::max(1.0, std::abs(d2)));
    CHECK(std::abs(d[3] - d3) <= 1e-3 * std::max(1.0, std::abs(d3)));
    CHECK(d[1] <= 0.0);
  }
}

TEST_CASE("derivative preconditions") {
  CHECK_THROWS_AS(derivatives_from_eigenvalues({0.2, 1.0}, 2), PreconditionError);
  const auto d = derivatives_from_eigenvalues({0.5}, 2);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(-0.5));
  CHECK(d[2] == doctest::Approx(0.0));
}

TEST_CASE("det bounded by exp(-v tr)") {
  for (double v : {0.25, 0.5, 1.0}) {
    const auto rep = lemma1_check(build_kernel(make_conjecture({0.6, 0.2}, {0.5}), 0), v);
    CHECK(rep.holds);
    CHECK(rep.det <= rep.exp_bound + 1e-12);
  }
}

TEST_CASE("bessel_trace against direct summation") {
  double ref = 0.0;
  for (int k = 1; k < 200; ++k) ref += k * std::pow(boost::math::cyl_bessel_j(10 + k, 12.0), 2);
  CHECK(bessel_trace(10, 6.0) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("linear_fit") {
  const auto [a, b] = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(a == doctest::Approx(2.0));
  CHECK(b == doctest::Approx(1.0));
  CHECK_THROWS_AS(linear_fit({1}, {1}), ArgumentError);
}

TEST_CASE("zero kernel") {
  const auto km = build_kernel(make_exponential(0.0), 0, 10);
  CHECK(trace(km) == 0.0);
  CHECK(fredholm_det_value(km, 0.7) == 1.0);
  for (auto z : eigenvalues(km)) CHECK(z == std::complex<double>(0.0, 0.0));
  const auto d = det_v_derivatives(km, 3);
  CHECK(d == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  const auto l = lemma1_check(km, 1.0);
  CHECK(l.holds);
  CHECK(l.det == l.exp_bound);
}

TEST_CASE("v = 0 gives det 1") {
  CHECK(fredholm_det_value(build_kernel(make_exponential(3.0), 1), 0.0) == 1.0);
}

TEST_CASE("growth and product spectra are real and in [0, 1)") {
  const auto g = spectrum(build_kernel(make_growth_symbol(6, 6, 0.4), 0, 60));
  CHECK(g.max_imag <= 1e-9);
  CHECK(g.eigenvalues.size() == 60);
  for (auto z : g.eigenvalues) {
    CHECK(z.real() >= -1e-9);
    CHECK(z.real() < 1.0);
  }
  const auto c = spectrum(build_kernel(make_conjecture({0.8, 0.3}, {0.5, 0.2}), 3, 80));
  CHECK(c.in_unit_interval);
  CHECK_FALSE(c.counterexample_candidate);
}

TEST_CASE("exp(-tr) bound examples") {
  CHECK(lemma1_check(build_kernel(make_exponential(7.0), 10), 0.9).holds);
  CHECK(lemma1_check(build_kernel(make_growth_symbol(8, 8, 0.3), 6), 1.0).holds);
}
