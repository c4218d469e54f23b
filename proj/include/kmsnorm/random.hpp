#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace kmsnorm {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key selects the seed and the upper half of the 128-bit counter
/// selects the stream, so (seed, stream) pairs index statistically
/// independent sequences without any shared state.
class Philox4x32 {
public:
  using result_type = std::uint64_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ >= 4) refill();
    const result_type v = (static_cast<result_type>(block_[index_]) << 32) | block_[index_ + 1];
    index_ += 2;
    return v;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    std::array<std::uint32_t, 4> c = counter_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    block_ = c;
    index_ = 0;
    if (++counter_[0] == 0) ++counter_[1];
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int index_ = 4;
};

/// A single random stream. Not thread-safe; give each worker its own.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) : engine_(seed, stream_id) {}

  double normal() { return normal_(engine_); }

  double uniform() { return uniform_(engine_); }

  /// Gamma variate with the given shape and rate.
  double gamma(double shape, double rate) {
    boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
  }

  Philox4x32& engine() { return engine_; }

private:
  Philox4x32 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

} // namespace kmsnorm
