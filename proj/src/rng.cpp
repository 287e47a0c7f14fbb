#include "gwldp/rng.hpp"

#include "gwldp/error.hpp"

#include <algorithm>
#include <cmath>

namespace gwldp {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngHandle::RngHandle(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

void RngHandle::refill() noexcept {
  const PhiloxBlock ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox4x32_10(ctr, key);
  ++block_;
  used_ = 0;
}

RngHandle::result_type RngHandle::operator()() noexcept {
  if (used_ >= 4) refill();
  const std::uint64_t lo = buffer_[static_cast<std::size_t>(used_)];
  const std::uint64_t hi = buffer_[static_cast<std::size_t>(used_) + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RngHandle::uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::size_t RngHandle::categorical(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DomainError(ErrorCode::domain, "categorical draw with zero total weight");
  const double target = uniform01() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (target < acc) return i;
  }
  return last;  // rounding at the top end
}

std::size_t RngHandle::categorical_log(const std::vector<double>& log_weights) {
  const double top = log_weights.empty() ? -INFINITY : *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw DomainError(ErrorCode::domain, "categorical draw with zero total weight");
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
  return categorical(w);
}

}  // namespace gwldp
