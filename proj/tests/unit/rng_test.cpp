#include <gtest/gtest.h>

#include <cmath>

#include "ustatlab/rng.hpp"

namespace ustat {
namespace {

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, SameCoordinatesSameStream) {
  CounterRng a(42, 3, 1), b(42, 3, 1);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, StreamsAndLanesDiffer) {
  CounterRng base(42, 3, 1), other_stream(42, 4, 1), other_lane(42, 3, 2), other_seed(43, 3, 1);
  const auto first = base.next_u64();
  EXPECT_NE(first, other_stream.next_u64());
  EXPECT_NE(first, other_lane.next_u64());
  EXPECT_NE(first, other_seed.next_u64());
}

TEST(CounterRng, UniformRangeAndMoments) {
  CounterRng r(1, 0);
  double sum = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(CounterRng, BelowIsUnbiased) {
  CounterRng r(5, 0);
  std::vector<int> counts(7, 0);
  const int n = 70'000;
  for (int i = 0; i < n; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4.0 * std::sqrt(n * (1.0 / 7) * (6.0 / 7)));
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(9, 0);
  double s = 0.0, s2 = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(CounterRng, Mix64IsABijectionOnSamples) {
  EXPECT_NE(mix64(0), mix64(1));
  EXPECT_EQ(mix64(12345), mix64(12345));
}

}  // namespace
}  // namespace ustat
