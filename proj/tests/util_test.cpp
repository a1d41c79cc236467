#include "chowla/util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace chowla;

namespace {

TEST(Isqrt, ExactBoundaries) {
  EXPECT_EQ(isqrt(0), 0u);
  EXPECT_EQ(isqrt(1), 1u);
  EXPECT_EQ(isqrt(3), 1u);
  EXPECT_EQ(isqrt(4), 2u);
  for (u64 k = 1; k <= 100000; k += 997) {
    EXPECT_EQ(isqrt(k * k), k);
    EXPECT_EQ(isqrt(k * k - 1), k - 1);
    EXPECT_EQ(isqrt(k * k + 1), k);
  }
  EXPECT_EQ(isqrt(0xFFFFFFFFULL), 65535u);
}

TEST(CheckedMul, Overflow) {
  EXPECT_EQ(checked_mul(3, 7), 21u);
  EXPECT_THROW(checked_mul(u64{1} << 33, u64{1} << 33), std::overflow_error);
  EXPECT_EQ(ipow_checked(10, 6), 1000000u);
  EXPECT_THROW(ipow_checked(10, 30), std::overflow_error);
}

TEST(FormatDouble, RoundTrips) {
  const double samples[] = {0.1,    1.0 / 3.0, 3.141592653589793, -2.5e-7,
                            1e300,  -0.0,      123456789.0,       5e-324};
  for (double v : samples) {
    const std::string s = format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(SumOverRange, ExactIntegerSum) {
  // every partial fits in 53 bits, so the result is exact whatever the order
  const double s = sum_over_range(0, 1000000, [](u64 n) {
    return static_cast<double>(n);
  });
  EXPECT_EQ(s, 500000500000.0);
}

TEST(SumOverRange, MatchesLongDoubleReference) {
  long double ref = 0.0L;
  for (u64 n = 1; n <= 3000000; ++n) ref += 1.0L / (static_cast<long double>(n) * n);
  const double s = sum_over_range(0, 3000000, [](u64 n) {
    return 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  });
  EXPECT_NEAR(s, static_cast<double>(ref), 1e-13);
}

TEST(SumOverRange, ThreadCountCannotChangeBits) {
  CounterRng rng(42);
  auto term = [&](u64 n) {
    const double u = rng.uniform01(n) - 0.5;
    return u / static_cast<double>(n);
  };
  const double t1 = sum_over_range(7, 2000007, term, 1);
  for (unsigned threads : {2u, 3u, 5u, 8u}) {
    const double tn = sum_over_range(7, 2000007, term, threads);
    EXPECT_EQ(t1, tn) << threads << " threads";
  }
}

TEST(SumOverRangeMulti, SlotsMatchSingleSeriesBitwise) {
  CounterRng rng(99);
  auto f0 = [&](u64 n) { return rng.uniform01(2 * n) / static_cast<double>(n); };
  auto f1 = [&](u64 n) { return (rng.uniform01(2 * n + 1) - 0.7) / std::sqrt(static_cast<double>(n)); };
  const double s0 = sum_over_range(10, 500010, f0);
  const double s1 = sum_over_range(10, 500010, f1);
  const auto both = sum_over_range_multi(
      10, 500010, 2,
      [&](u64 n, std::span<double> out) {
        out[0] = f0(n);
        out[1] = f1(n);
      });
  EXPECT_EQ(both[0], s0);
  EXPECT_EQ(both[1], s1);
  for (unsigned threads : {2u, 4u}) {
    const auto bt = sum_over_range_multi(
        10, 500010, 2,
        [&](u64 n, std::span<double> out) {
          out[0] = f0(n);
          out[1] = f1(n);
        },
        threads);
    EXPECT_EQ(bt[0], s0);
    EXPECT_EQ(bt[1], s1);
  }
}

TEST(PairwiseStack, PushAtAgreesWithUnitPushes) {
  // 13 blocks: 8 pushed as one level-3 aggregate, then 4 as level-2, then 1
  std::vector<double> vals;
  CounterRng rng(5);
  for (int i = 0; i < 13; ++i) vals.push_back(rng.uniform01(i) - 0.4);

  PairwiseStack unit;
  for (double v : vals) unit.push(v);

  auto subtree = [&](int lo, int hi) {
    PairwiseStack s;
    for (int i = lo; i < hi; ++i) s.push(vals[i]);
    return s.total();
  };
  PairwiseStack mixed;
  mixed.push_at(subtree(0, 8), 3);
  mixed.push_at(subtree(8, 12), 2);
  mixed.push(vals[12]);
  EXPECT_EQ(unit.total(), mixed.total());
}

TEST(CounterRng, DeterministicAndSeedSensitive) {
  CounterRng a(1), b(1), c(2);
  EXPECT_EQ(a.at(0), b.at(0));
  EXPECT_EQ(a.at(123456), b.at(123456));
  EXPECT_NE(a.at(0), c.at(0));
  double mean = 0.0;
  for (u64 i = 0; i < 10000; ++i) {
    const double u = a.uniform01(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  mean /= 10000;
  EXPECT_NEAR(mean, 0.5, 0.02);
  for (u64 i = 0; i < 1000; ++i) ASSERT_LT(a.below(i, 17), 17u);
}

}  // namespace
