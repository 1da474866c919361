#include "fredholm/mc_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "fredholm/errors.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/spectral.hpp"

namespace fredholm {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint32_t Philox::next_u32() {
  if (used_ == 4) {
    buf_ = block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                 {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    ++counter_;
    used_ = 0;
  }
  return buf_[used_++];
}

double Philox::next_double() {
  const std::uint64_t hi = next_u32() >> 5;  // 27 bits
  const std::uint64_t lo = next_u32() >> 6;  // 26 bits
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

std::uint32_t Philox::bounded(std::uint32_t bound) {
  if (bound == 0) throw ArgumentError("Philox::bounded: bound must be > 0");
  std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * bound;
  auto low = static_cast<std::uint32_t>(m);
  if (low < bound) {
    const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
    while (low < threshold) {
      m = static_cast<std::uint64_t>(next_u32()) * bound;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

std::uint64_t poisson(Philox& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ArgumentError("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  const int parts = static_cast<int>(std::ceil(mean / 200.0));
  const double mu = mean / parts;
  std::uint64_t total = 0;
  for (int p = 0; p < parts; ++p) {
    const double u = rng.next_double();
    double prob = std::exp(-mu), cdf = prob;
    std::uint64_t k = 0;
    while (u >= cdf && k < 100000) {
      ++k;
      prob *= mu / static_cast<double>(k);
      cdf += prob;
      if (prob == 0.0 && cdf < u) break;
    }
    total += k;
  }
  return total;
}

std::vector<int> random_permutation(Philox& rng, int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i + 1;
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.bounded(static_cast<std::uint32_t>(i + 1))]);
  return p;
}

namespace {

void check_permutation(const std::vector<int>& perm) {
  std::vector<char> seen(perm.size() + 1, 0);
  for (int v : perm) {
    if (v < 1 || v > static_cast<int>(perm.size()) || seen[v])
      throw ArgumentError("expected a permutation of 1..N");
    seen[v] = 1;
  }
}

}  // namespace

int patience_lis(const std::vector<int>& perm) {
  check_permutation(perm);
  std::vector<int> tops;
  for (int v : perm) {
    auto it = std::lower_bound(tops.begin(), tops.end(), v);
    if (it == tops.end())
      tops.push_back(v);
    else
      *it = v;
  }
  return static_cast<int>(tops.size());
}

TwoRows rsk_two_rows(const std::vector<int>& perm) {
  check_permutation(perm);
  std::vector<int> row1, row2;
  for (int v : perm) {
    auto it = std::upper_bound(row1.begin(), row1.end(), v);
    if (it == row1.end()) {
      row1.push_back(v);
      continue;
    }
    const int bumped = *it;
    *it = v;
    auto it2 = std::upper_bound(row2.begin(), row2.end(), bumped);
    if (it2 == row2.end())
      row2.push_back(bumped);
    else
      *it2 = bumped;
  }
  return {static_cast<int>(row1.size()), static_cast<int>(row2.size())};
}

std::vector<PermutationSample> sample_poissonized(double t, int samples, std::uint64_t seed,
                                                  int threads) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("sample_poissonized: t must be >= 0");
  if (samples < 1) throw ArgumentError("sample_poissonized: samples must be >= 1");
  std::vector<PermutationSample> out(samples);
  parallel_for(0, samples, [&](int i) {
    Philox rng(seed, static_cast<std::uint64_t>(i));
    const auto N = poisson(rng, t * t);
    const auto perm = random_permutation(rng, static_cast<int>(N));
    auto& s = out[i];
    s.size = static_cast<int>(N);
    s.shape_prefix = rsk_two_rows(perm);
    s.lis = s.shape_prefix.lambda1;
  }, threads);
  return out;
}

McReport compare_with_det(double t, int n_lo, int n_hi, int samples, std::uint64_t seed,
                          const std::vector<int>& offsets, int threads) {
  if (n_lo > n_hi) throw ArgumentError("compare_with_det: empty n window");
  if (offsets.empty()) throw ArgumentError("compare_with_det: no offsets to test");
  McReport rep;
  rep.t = t;
  rep.samples = samples;
  rep.seed = seed;
  rep.offsets = offsets;
  const auto draws = sample_poissonized(t, samples, seed, threads);
  std::vector<long> counts(n_hi - n_lo + 1, 0);
  for (const auto& d : draws)
    for (int n = std::max(n_lo, d.lis); n <= n_hi; ++n) ++counts[n - n_lo];
  std::vector<bool> ok(offsets.size(), true);
  for (int n = n_lo; n <= n_hi; ++n) {
    McRow row;
    row.n = n;
    row.p_hat = static_cast<double>(counts[n - n_lo]) / samples;
    row.std_error = std::sqrt(row.p_hat * (1.0 - row.p_hat) / samples);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const int off = n + offsets[k];
      const double det = fredholm_det(build_kernel(make_exponential(t), off, 0, 1e-14), 1.0).value;
      const double se = std::max(row.std_error, std::sqrt(std::max(det * (1.0 - det), 0.0) / samples));
      const double diff = std::abs(row.p_hat - det);
      const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
      row.det.push_back(det);
      row.z.push_back(z);
      if (z > 4.0) ok[k] = false;
    }
    if (!rep.rows.empty() && row.p_hat < rep.rows.back().p_hat) rep.monotone = false;
    rep.rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < offsets.size(); ++k)
    if (ok[k]) rep.consistent.push_back(offsets[k]);
  if (rep.consistent.empty())
    throw ConvergenceError("compare_with_det: no offset convention agrees with the samples");
  rep.unique = rep.consistent.size() == 1;
  rep.chosen_offset = rep.consistent.front();
  const auto idx = std::find(offsets.begin(), offsets.end(), rep.chosen_offset) - offsets.begin();
  for (const auto& row : rep.rows)
    rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(row.p_hat - row.det[idx]));
  return rep;
}

}  // namespace fredholm
