#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <Eigen/Dense>
#include <complex>

#include "fredholm/errors.hpp"
#include "fredholm/growth.hpp"
#include "fredholm/growth_exact.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/symbols.hpp"

using namespace fredholm;
using cd = std::complex<double>;

TEST_CASE("parameters and validation") {
  CHECK(time_constant(1.0, 0.25) == doctest::Approx(2.0 * 0.5 / 1.25));
  const auto gp = make_growth_params(1.0, 0.5, 20, 1.0);
  CHECK(gp.n == 20);
  CHECK(gp.h == static_cast<int>(std::floor(gp.c_prime_nominal * 20 + 1e-9)));
  CHECK(gp.c_prime == doctest::Approx(gp.h / 20.0));
  CHECK_THROWS_AS(make_growth_params(1.0, 1.0, 20, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_growth_params(0.5, 0.5, 21, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_growth_params(3.0, 0.5, 20, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_growth_params(1.0, 0.5, 8, 40.0), RegimeError);
}

TEST_CASE("critical points solve the saddle equation") {
  const double a = 1.0, r = 0.5;
  for (double cp : {0.3, 0.6, 0.9}) {
    const auto z = critical_points(a, r, cp);
    for (cd u : {z.u_plus, z.u_minus}) {
      const cd q = (a + cp) * u * u + ((1 - r) * cp + (1 - a) * r) * u + (1 - cp) * r;
      CHECK(std::abs(q) <= 1e-12);
      CHECK(std::abs(sigma_prime(u, a, r, cp)) <= 1e-10);
    }
    CHECK(z.u_plus.imag() >= 0.0);
    CHECK(std::abs(z.u_plus - std::conj(z.u_minus)) <= 1e-12);
  }
  CHECK_THROWS_AS(critical_points(a, r, 0.99), RegimeError);
}

TEST_CASE("sigma derivatives against finite differences") {
  const double a = 0.7, r = 0.4, cp = 0.5;
  const cd z(-0.2, 0.3), h(1e-5, 0.0);
  const cd d1 = (sigma(z + h, a, r, cp) - sigma(z - h, a, r, cp)) / (2.0 * h);
  CHECK(std::abs(d1 - sigma_prime(z, a, r, cp)) <= 1e-8);
  const cd d2 = (sigma_prime(z + h, a, r, cp) - sigma_prime(z - h, a, r, cp)) / (2.0 * h);
  CHECK(std::abs(d2 - sigma_second(z, a, r, cp)) <= 1e-7);
  CHECK_THROWS_AS(sigma(cd(0.3, 0.0), a, r, cp), ArgumentError);
  CHECK_THROWS_AS(sigma(cd(-2.0, 0.0), a, r, cp), ArgumentError);
}

TEST_CASE("contour trace equals the matrix trace") {
  const auto gp = make_growth_params(1.0, 0.3, 20, 1.0);
  CHECK(gp.h == 14);
  const auto km = build_kernel(make_growth_symbol(gp.n, gp.m, gp.r), gp.h);
  const double mt = trace(km);
  CHECK(mt == doctest::Approx(0.5768433530758067).epsilon(1e-11));
  const auto ct = trace_contour(gp);
  CHECK(std::abs(ct.value - mt) <= 1e-9 * mt);
  CHECK(std::abs(ct.imag_residue) <= 1e-10);
  CHECK(ct.rho2 < ct.rho1);
  CHECK(ct.rho1 > gp.r);
  CHECK(ct.rho1 < 1.0);
  GrowthExact ge(gp.n, gp.m, gp.r);
  CHECK(ge.trace(gp.h) == doctest::Approx(mt).epsilon(1e-12));
}

TEST_CASE("leading trace: integral and endpoint forms agree") {
  const auto gp = make_growth_params(1.0, 0.5, 400, 4.0);
  const auto lt = leading_trace(gp);
  CHECK(lt.relative_difference <= 1e-8);
  CHECK(lt.value > 0.0);
  const auto far = leading_trace_at(1.0, 0.5, 400, gp.c);
  CHECK(std::abs(far.value) <= 1e-12);
}

TEST_CASE("lemma3 experiment on a small grid") {
  const auto res = lemma3_experiment(1.0, 0.3, {20, 40}, {1.0, 2.0, 3.0}, 40, 1);
  CHECK(res.rows.size() == 6);
  CHECK(res.det_monotone);
  CHECK(res.lemma1_all);
  for (const auto& row : res.rows) {
    CHECK(std::abs(row.trace_contour - row.trace_matrix) <= 1e-8 * row.trace_matrix);
    CHECK(row.det <= row.exp_minus_trace + 1e-12);
  }
}

TEST_CASE("multiprecision determinant of the active block") {
  const auto gp = make_growth_params(1.0, 0.3, 40, 1.0);
  GrowthExact ge(gp.n, gp.m, gp.r);
  const int rows = gp.m - gp.h;
  const Eigen::MatrixXd K = ge.section(gp.h, rows, rows);
  const double lu = (Eigen::MatrixXd::Identity(rows, rows) - 0.7 * K).determinant();
  const auto d = ge.det(gp.h, 0.7);
  CHECK(d.value == doctest::Approx(lu).epsilon(1e-10));
  CHECK(d.log_abs == doctest::Approx(std::log(std::abs(lu))).epsilon(1e-10));
  CHECK(ge.det(gp.m).value == 1.0);

  // Far below double resolution the sequence must stay positive and decreasing.
  double prev = 0.0;
  for (double s : {6.0, 7.0, 8.0}) {
    const auto g2 = make_growth_params(1.0, 0.3, 40, s);
    const auto e = GrowthExact(g2.n, g2.m, g2.r).det(g2.h);
    CHECK(e.sign == 1);
    if (s > 6.0) CHECK(e.log_abs < prev);
    prev = e.log_abs;
  }
}

TEST_CASE("time constant and the double saddle") {
  CHECK(time_constant(1.0, 0.25) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(time_constant(0.7, 0.0) == 0.0);
  const auto z = critical_points(1.0, 0.25, 0.8);
  CHECK(std::abs(z.discriminant) <= 1e-12);
  CHECK(std::abs(z.u_plus - cd(-1.0 / 6.0, 0.0)) <= 1e-6);
  CHECK(std::abs(z.u_minus - cd(-1.0 / 6.0, 0.0)) <= 1e-6);
}

TEST_CASE("sigma: conjugation, degenerate saddle, direct product") {
  const double a = 1.0, r = 0.25, c = 0.8;
  const cd z(-0.2, 0.1);
  CHECK(std::abs(sigma(std::conj(z), a, r, 0.5) - std::conj(sigma(z, a, r, 0.5))) <= 1e-14);
  const cd uc(-1.0 / 6.0, 0.0);
  auto second_diff = [&](double h) {
    const cd d(h, 0.0);
    return (sigma(uc + d, a, r, c) - 2.0 * sigma(uc, a, r, c) + sigma(uc - d, a, r, c)) / (h * h);
  };
  const cd fd2 = (4.0 * second_diff(1e-3) - second_diff(2e-3)) / 3.0;
  CHECK(std::abs(fd2) <= 1e-7);
  CHECK(std::abs(sigma_second(uc, a, r, c)) <= 1e-7);
  // m = 10, c' = 0.3: exp(m sigma) = (1+z)^10 (r - z)^10 (-z)^{-7}; compare
  // with (1+z)^n (1 - r/z)^m z^{c'm} up to the constant (-1)^{c'm}.
  const int m = 10, hh = 3;
  const cd w(-0.3, 0.2);
  const cd lhs = std::exp(static_cast<double>(m) * sigma(w, 1.0, r, hh / 10.0));
  const cd rhs = std::pow(1.0 + w, m) * std::pow(1.0 - r / w, m) * std::pow(w, hh);
  CHECK(std::abs(lhs - rhs * std::pow(-1.0, hh)) <= 1e-10 * std::abs(rhs));
}

TEST_CASE("leading trace: positivity and the s^{3/2} law") {
  std::vector<double> ls, lt;
  for (double s : {2.0, 4.0, 6.0, 8.0, 10.0}) {
    const auto gp = make_growth_params(1.0, 0.3, 1000000, s);
    const double v = leading_trace(gp).value;
    CHECK(v > 0.0);
    ls.push_back(std::log(s));
    lt.push_back(std::log(v));
  }
  const auto [slope, icpt] = linear_fit(ls, lt);
  CHECK(slope >= 1.45);
  CHECK(slope <= 1.55);
}

TEST_CASE("contour trace vanishes with r") {
  CHECK(trace_contour(5, 5, 0.0, 2).value == 0.0);
  CHECK(std::abs(trace_contour(5, 5, 1e-6, 2).value) <= 1e-9);
}
