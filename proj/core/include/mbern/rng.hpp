#pragma once

// Counter-based random streams.
//
// A stream is addressed by (seed, trial, step); its draws are a pure function
// of that address, so trials can be executed in any order or on any number of
// workers and still produce identical results. The block cipher is
// Philox4x32-10; variate transforms are written out here rather than taken
// from <random> so the output does not depend on the standard library.

#include <array>
#include <cstdint>

namespace mbern {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// One Philox4x32 block with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t step);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_low();
  double normal();
  // Exponential with rate 1.
  double exponential();
  // +1 or -1 with equal probability.
  double sign();

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter ctr_;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;  // 64-bit words left in buffer_
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mbern
