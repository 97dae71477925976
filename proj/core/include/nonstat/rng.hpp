#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace nonstat {

/**
 * Counter-based random number generator (Philox 4x32, 10 rounds).
 *
 * The generator is a pure function of (seed, stream, position), so a given
 * seed reproduces the same values on every platform, and independent streams
 * can be drawn from the same seed without coordination.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [a, b).
  double uniform(double a, double b);
  /// Uniform integer in [0, n). Unbiased.
  std::uint32_t uniform_below(std::uint32_t n);
  /// Standard normal via the Box-Muller transform.
  double normal();
  double normal(double mean, double stddev);

  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);

  /// Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 4> block_at(std::uint64_t position) const;
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of the R diagonal fixed).
Eigen::MatrixXd random_orthogonal(int n, Rng& rng);

}  // namespace nonstat
