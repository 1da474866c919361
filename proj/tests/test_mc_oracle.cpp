#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fredholm/errors.hpp"
#include "fredholm/mc_oracle.hpp"

using namespace fredholm;

namespace {

int lis_quadratic(const std::vector<int>& p) {
  std::vector<int> best(p.size(), 1);
  int out = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (p[j] < p[i]) best[i] = std::max(best[i], best[j] + 1);
    out = std::max(out, best[i]);
  }
  return out;
}

bool increasing(const std::vector<int>& p, unsigned mask) {
  int last = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (mask >> i & 1u) {
      if (p[i] < last) return false;
      last = p[i];
    }
  return true;
}

// Largest union of two disjoint increasing subsequences (Greene).
int greene2(const std::vector<int>& p) {
  const unsigned full = (1u << p.size()) - 1;
  int best = 0;
  for (unsigned a = 0; a <= full; ++a) {
    if (!increasing(p, a)) continue;
    const unsigned rest = full & ~a;
    for (unsigned b = rest;; b = (b - 1) & rest) {
      if (increasing(p, b)) best = std::max(best, __builtin_popcount(a) + __builtin_popcount(b));
      if (b == 0) break;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniforms and bounded integers") {
  Philox rng(1, 2);
  double sum = 0.0;
  std::vector<int> hist(7, 0);
  const int N = 70000;
  for (int i = 0; i < N; ++i) {
    const double u = rng.next_double();
    CHECK((u >= 0.0 && u < 1.0));
    sum += u;
    ++hist[rng.bounded(7)];
  }
  CHECK(std::abs(sum / N - 0.5) < 0.01);
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK_THROWS_AS(rng.bounded(0), ArgumentError);
}

TEST_CASE("poisson moments") {
  for (double mean : {0.7, 16.0, 450.0}) {
    Philox rng(99, static_cast<std::uint64_t>(mean * 10));
    const int N = 20000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double k = static_cast<double>(poisson(rng, mean));
      s += k;
      s2 += k * k;
    }
    const double mu = s / N, var = s2 / N - mu * mu;
    CHECK(std::abs(mu - mean) < 5.0 * std::sqrt(mean / N));
    CHECK(std::abs(var / mean - 1.0) < 0.06);
  }
  CHECK_THROWS_AS(poisson(*std::make_unique<Philox>(0, 0), -1.0), ArgumentError);
}

TEST_CASE("permutations are uniform on S_3") {
  Philox rng(5, 0);
  std::map<std::vector<int>, int> counts;
  for (int i = 0; i < 60000; ++i) ++counts[random_permutation(rng, 3)];
  CHECK(counts.size() == 6);
  for (const auto& [p, c] : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("LIS and two RSK rows against brute force") {
  Philox rng(2024, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(9));
    const auto p = random_permutation(rng, n);
    CHECK(patience_lis(p) == lis_quadratic(p));
    const auto rows = rsk_two_rows(p);
    CHECK(rows.lambda1 == lis_quadratic(p));
    CHECK(rows.lambda1 + rows.lambda2 == greene2(p));
  }
  CHECK(patience_lis({}) == 0);
  CHECK_THROWS_AS(patience_lis({1, 1}), ArgumentError);
  CHECK_THROWS_AS(patience_lis({0, 1}), ArgumentError);
}

TEST_CASE("sampling is independent of the thread count") {
  const auto a = sample_poissonized(3.0, 500, 42, 1);
  const auto b = sample_poissonized(3.0, 500, 42, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].size == b[i].size);
    CHECK(a[i].lis == b[i].lis);
    CHECK(a[i].shape_prefix.lambda2 == b[i].shape_prefix.lambda2);
  }
}

TEST_CASE("comparison picks the zero offset") {
  const auto rep = compare_with_det(1.5, 1, 6, 20000, 3);
  CHECK(rep.unique);
  CHECK(rep.chosen_offset == 0);
  CHECK(rep.monotone);
  CHECK(rep.max_abs_diff < 0.02);
}

TEST_CASE("small LIS and RSK examples") {
  CHECK(patience_lis({1, 2, 3, 4, 5}) == 5);
  CHECK(patience_lis({5, 4, 3, 2, 1}) == 1);
  CHECK(patience_lis({2, 1, 3}) == 2);
  auto rows = rsk_two_rows({1, 2, 3, 4});
  CHECK(rows.lambda1 == 4);
  CHECK(rows.lambda2 == 0);
  rows = rsk_two_rows({4, 3, 2, 1});
  CHECK(rows.lambda1 == 1);
  CHECK(rows.lambda2 == 1);
  rows = rsk_two_rows({2, 1, 3});
  CHECK(rows.lambda1 == 2);
  CHECK(rows.lambda2 == 1);
}

TEST_CASE("t = 0 draws empty permutations") {
  for (const auto& s : sample_poissonized(0.0, 50, 1)) {
    CHECK(s.size == 0);
    CHECK(s.lis == 0);
  }
}

TEST_CASE("reports are reproducible") {
  const auto a = compare_with_det(1.0, 1, 4, 3000, 77, {-1, 0, 1}, 1);
  const auto b = compare_with_det(1.0, 1, 4, 3000, 77, {-1, 0, 1}, 2);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].p_hat == b.rows[i].p_hat);
    CHECK(a.rows[i].det == b.rows[i].det);
  }
}
