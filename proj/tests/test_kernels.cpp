#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "fredholm/errors.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/symbols.hpp"

using namespace fredholm;

TEST_CASE("exponential kernel entries are sums of Bessel products") {
  const double t = 2.5;
  const int off = 3;
  const auto km = build_kernel(make_exponential(t), off, 30);
  CHECK(km.size == 30);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      double ref = 0.0;
      for (int k = 1; k < 80; ++k)
        ref += boost::math::cyl_bessel_j(off + a + k, 2 * t) * boost::math::cyl_bessel_j(off + b + k, 2 * t);
      CHECK(std::abs(km.entries(a, b) - ref) <= 1e-13);
    }
  CHECK((km.entries - km.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("growth kernel is an exact finite section") {
  const int n = 8, m = 6;
  const double r = 0.4;
  const auto sym = make_growth_symbol(n, m, r);
  const auto km = build_kernel(sym, 1, 20);
  CHECK(km.exact_section);
  CHECK(km.size == m - 1);
  CHECK(km.requested_size == 20);
  const auto f = laurent_coeffs(sym, Ratio::MinusOverPlus, -40, 80);
  const auto g = laurent_coeffs(sym, Ratio::PlusOverMinus, -40, 40);
  for (int a = 0; a < km.size; ++a)
    for (int b = 0; b < km.size; ++b) {
      const int i = 1 + a, j = 1 + b;
      double ref = 0.0;
      for (int k = 1; k + j <= 40; ++k) ref += f.at(i + k) * g.at(-k - j);
      CHECK(std::abs(km.entries(a, b) - ref) <= 1e-12);
    }
  CHECK(trace(km) == doctest::Approx(build_kernel(sym, 1, 5).entries.trace()).epsilon(1e-14));
}

TEST_CASE("generic kernel matches an exact one when the families coincide") {
  // n = m = 1 growth is the conjecture product with r = {1}, s = {r}.
  const auto growth = make_growth_symbol(1, 1, 0.3);
  const auto conj = make_conjecture({1.0}, {0.3});
  const auto a = build_kernel(growth, 0, 10);
  const auto b = build_kernel(conj, 0, 10);
  CHECK(std::abs(fredholm_det_value(a) - fredholm_det_value(b)) <= 1e-12);
  CHECK(std::abs(trace(a) - trace(b)) <= 1e-12);
}

TEST_CASE("symmetrizer on hand-built matrices") {
  KernelMatrix km(make_exponential(1.0));
  km.size = km.requested_size = 4;
  km.entries.resize(4, 4);
  km.entries << 0.5, 2.0, 0.0, 0.0,
                0.5, 0.4, 3.0, 0.0,
                0.0, 0.3, 0.2, 0.1,
                0.0, 0.0, 0.4, 0.1;
  const auto s = find_symmetrizer(km);
  REQUIRE(s.possible);
  const auto S = symmetrized_entries(km, s);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  Eigen::EigenSolver<Eigen::MatrixXd> e1(km.entries), e2(S);
  Eigen::VectorXd l1 = e1.eigenvalues().real(), l2 = e2.eigenvalues().real();
  std::sort(l1.data(), l1.data() + 4);
  std::sort(l2.data(), l2.data() + 4);
  CHECK((l1 - l2).cwiseAbs().maxCoeff() <= 1e-12);

  km.entries(2, 1) = -0.3;
  CHECK_FALSE(find_symmetrizer(km).possible);
}

TEST_CASE("weights preserve the spectrum") {
  const auto km = build_kernel(make_johansson(3, 5, 0.5), 1, 24);
  const auto w = apply_weight(km, WeightKind::Geometric, 0.7);
  const auto a = eigenvalues(km), b = eigenvalues(w);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
  CHECK(w.weight_base.has_value());
}

TEST_CASE("default sizes") {
  CHECK(default_kernel_size(make_exponential(0.1), 0) == 48);
  CHECK(default_kernel_size(make_exponential(200.0), 0) >= 400);
  CHECK(default_kernel_size(make_growth_symbol(60, 50, 0.5), 0) == 100);
  CHECK(last_row_magnitude(build_kernel(make_exponential(2.0), 0)) < 1e-15);
}

TEST_CASE("degenerate symbols give zero kernels") {
  const auto e = build_kernel(make_exponential(0.0), 0, 20);
  CHECK(e.entries.cwiseAbs().maxCoeff() == 0.0);
  const auto g = build_kernel(make_growth_symbol(4, 4, 0.0), 0, 20);
  CHECK((g.size == 0 || g.entries.cwiseAbs().maxCoeff() == 0.0));
  CHECK(fredholm_det_value(g) == 1.0);
}

TEST_CASE("exponential entry against a direct Bessel sum") {
  const auto km = build_kernel(make_exponential(2.0), 5, 30);
  double ref = 0.0;
  for (int k = 1; k < 60; ++k) ref += std::pow(boost::math::cyl_bessel_j(5 + k, 4.0), 2);
  CHECK(std::abs(km.entries(0, 0) - ref) <= km.tol);
}

TEST_CASE("unit weight leaves the matrix unchanged") {
  const auto km = build_kernel(make_exponential(1.5), 2, 20);
  const auto w = apply_weight(km, WeightKind::Geometric, 1.0);
  CHECK((w.entries - km.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetrizer examples") {
  const auto sym_in = build_kernel(make_exponential(2.0), 0, 30);
  const auto s0 = find_symmetrizer(sym_in);
  CHECK(s0.residual == 0.0);
  CHECK(s0.log_d.cwiseAbs().maxCoeff() <= 1e-15);

  const auto g = build_kernel(make_growth_symbol(4, 4, 0.3), 0, 40);
  const auto sg = find_symmetrizer(g);
  CHECK(sg.possible);
  CHECK(sg.residual <= 1e-8 * std::max(1.0, sg.scale));

  KernelMatrix r1(make_exponential(1.0));
  r1.size = r1.requested_size = 6;
  Eigen::VectorXd a(6), b(6);
  a << 1.0, 0.5, 2.0, 0.1, 3.0, 0.7;
  b << 0.2, 1.5, 0.3, 4.0, 0.6, 0.9;
  r1.entries = a * b.transpose();
  const auto s1 = find_symmetrizer(r1);
  CHECK(s1.possible);
  CHECK(s1.residual <= 1e-14 * s1.scale);
}
