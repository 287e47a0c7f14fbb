#pragma once

// Counter-based Philox4x32-10 generator. A handle is fully determined by
// (seed, stream); distinct streams give independent sequences without any
// shared state, so parallel workers can derive their own.

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace gwldp {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

class RngHandle {
 public:
  using result_type = std::uint64_t;

  explicit RngHandle(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Index i with probability w[i] / sum(w). Weights must be nonnegative
  /// with a positive sum.
  std::size_t categorical(const std::vector<double>& weights);
  /// Same, from unnormalized log weights (-inf allowed).
  std::size_t categorical_log(const std::vector<double>& log_weights);

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
};

}  // namespace gwldp
