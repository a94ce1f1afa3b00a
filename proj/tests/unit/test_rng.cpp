#include "mbern/rng.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

namespace mbern {
namespace {

// Known-answer vectors for Philox4x32-10 published with the Random123 suite.
TEST(PhiloxTest, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(PhiloxTest, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(PhiloxTest, KnownAnswerPi) {
  const PhiloxCounter out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                          {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterStreamTest, PureInAddress) {
  CounterStream a(9, 4, 2);
  CounterStream b(9, 4, 2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterStreamTest, DistinctAddressesDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (std::uint64_t trial = 0; trial < 4; ++trial) {
      for (std::uint32_t step = 0; step < 4; ++step) {
        first.insert(CounterStream(seed, trial, step).next_u64());
      }
    }
  }
  EXPECT_EQ(first.size(), 64u);
}

TEST(CounterStreamTest, VariateRanges) {
  CounterStream s(1, 2, 3);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double v = s.uniform_open_low();
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(s.exponential(), 0.0);
    const double e = s.sign();
    EXPECT_TRUE(e == 1.0 || e == -1.0);
    EXPECT_TRUE(std::isfinite(s.normal()));
  }
}

TEST(CounterStreamTest, MomentsMatch) {
  constexpr int kDraws = 200000;
  CounterStream s(5, 0, 0);
  double u1 = 0, n1 = 0, n2 = 0, e1 = 0, sg = 0;
  for (int i = 0; i < kDraws; ++i) {
    u1 += s.uniform();
    const double z = s.normal();
    n1 += z;
    n2 += z * z;
    e1 += s.exponential();
    sg += s.sign();
  }
  // Five standard errors.
  const double se = 5.0 / std::sqrt(static_cast<double>(kDraws));
  EXPECT_NEAR(u1 / kDraws, 0.5, se * std::sqrt(1.0 / 12.0));
  EXPECT_NEAR(n1 / kDraws, 0.0, se);
  EXPECT_NEAR(n2 / kDraws, 1.0, se * std::sqrt(2.0));
  EXPECT_NEAR(e1 / kDraws, 1.0, se);
  EXPECT_NEAR(sg / kDraws, 0.0, se);
}

}  // namespace
}  // namespace mbern
