#include "chowla/log_average.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace chowla;

namespace {

TEST(LogAverage, HandValues) {
  // (0,3], f(n) = n: numerator 3, normalizer 1 + 1/2 + 1/3 = 11/6
  auto r = log_average(0, 3, [](u64 n) { return static_cast<double>(n); });
  EXPECT_NEAR(r.value, 18.0 / 11.0, 1e-15);
  EXPECT_NEAR(r.normalizer, 11.0 / 6.0, 1e-15);
  EXPECT_EQ(r.term_count, 3u);

  auto ones = log_average(0, 1000, [](u64) { return 1.0; });
  EXPECT_NEAR(ones.value, 1.0, 1e-14);
}

TEST(LogAverage, EmptyRangeThrows) {
  EXPECT_THROW(log_average(5, 5, [](u64) { return 1.0; }), empty_range_error);
  EXPECT_THROW(log_average(9, 3, [](u64) { return 1.0; }), empty_range_error);
}

TEST(LogAverage, MatchesLongDoubleReference) {
  auto f = [](u64 n) { return (n % 3 == 0 ? -1.0 : 1.0); };
  auto r = log_average(100, 2000000, f);
  auto [num, den] = oracle::log_average_parts(100, 2000000, f);
  EXPECT_NEAR(r.value, static_cast<double>(num / den), 1e-13);
}

TEST(PrimeLogAverage, HandValues) {
  SieveTable t(1000);
  // primes in (4,8] are 5 and 7; with f(p) = p the mean is 2 / (1/5 + 1/7)
  auto r = prime_log_average(t, 4, 8, [](u64 p) { return static_cast<double>(p); });
  EXPECT_NEAR(r.value, 35.0 / 6.0, 1e-14);
  EXPECT_EQ(r.term_count, 2u);

  auto nat = prime_natural_average(t, 4, 8,
                                   [](u64 p) { return static_cast<double>(p); });
  EXPECT_NEAR(nat.value, 6.0, 1e-14);
  EXPECT_EQ(nat.normalizer, 2.0);
}

TEST(PrimeLogAverage, NoPrimesThrows) {
  SieveTable t(1000);
  EXPECT_THROW(prime_log_average(t, 8, 10, [](u64) { return 1.0; }),
               empty_range_error);
  EXPECT_THROW(prime_natural_average(t, 24, 28, [](u64) { return 1.0; }),
               empty_range_error);
  EXPECT_THROW(prime_log_average(t, 0, 2000, [](u64) { return 1.0; }),
               std::out_of_range);
}

TEST(PrimeLogAverage, CountsPrimesOnly) {
  SieveTable t(100000);
  auto r = prime_log_average(t, 0, 100000, [](u64) { return 1.0; });
  EXPECT_EQ(r.term_count, 9592u);  // pi(1e5)
  EXPECT_NEAR(r.value, 1.0, 1e-14);
}

}  // namespace
