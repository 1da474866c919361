#pragma once

// Monte Carlo oracle for Poissonized Plancherel measure: N ~ Poisson(t^2),
// a uniform permutation of size N, and the first two RSK rows.

#include <array>
#include <cstdint>
#include <vector>

namespace fredholm {

/// Philox4x32-10 counter-based generator (Salmon et al.). Each (key, stream)
/// pair is an independent, reproducible sequence.
class Philox {
 public:
  Philox(std::uint64_t key, std::uint64_t stream) : key_(key), stream_(stream) {}

  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double next_double();
  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint32_t bounded(std::uint32_t bound);

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
};

/// Poisson(mean) by inversion; means above 200 are split into equal parts.
std::uint64_t poisson(Philox& rng, double mean);

/// Uniform permutation of 1..n (Fisher-Yates).
std::vector<int> random_permutation(Philox& rng, int n);

/// Longest strictly increasing subsequence by patience sorting. Throws
/// ArgumentError unless perm is a permutation of 1..N.
int patience_lis(const std::vector<int>& perm);

struct TwoRows {
  int lambda1 = 0;
  int lambda2 = 0;
};

/// First two rows of the RSK insertion tableau.
TwoRows rsk_two_rows(const std::vector<int>& perm);

struct PermutationSample {
  int size = 0;
  int lis = 0;
  TwoRows shape_prefix;
};

/// Sample i uses the stream (seed, i), so results do not depend on threads.
std::vector<PermutationSample> sample_poissonized(double t, int samples, std::uint64_t seed,
                                                  int threads = 0);

struct McRow {
  int n = 0;
  double p_hat = 0.0;
  /// sqrt(p_hat (1 - p_hat) / samples).
  double std_error = 0.0;
  /// det(I - K) on l^2({n + d, ...}) for each tested offset shift d.
  std::vector<double> det;
  /// |p_hat - det| / max(std_error, sqrt(det (1 - det) / samples)).
  std::vector<double> z;
};

struct McReport {
  double t = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<int> offsets;
  std::vector<McRow> rows;
  /// Offsets for which every row has z <= 4.
  std::vector<int> consistent;
  /// The unique consistent offset, or the frozen one when supplied.
  int chosen_offset = 0;
  bool unique = false;
  bool monotone = true;
  double max_abs_diff = 0.0;
};

/// Compares the empirical P(lambda_1 <= n) with det(I - K) on
/// l^2({n + d, ...}) for d in `offsets`. Throws ConvergenceError when no
/// offset is consistent.
McReport compare_with_det(double t, int n_lo, int n_hi, int samples, std::uint64_t seed,
                          const std::vector<int>& offsets = {-1, 0, 1}, int threads = 0);

}  // namespace fredholm
