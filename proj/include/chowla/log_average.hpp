#pragma once

#include "chowla/sieve.hpp"
#include "chowla/util.hpp"

namespace chowla {

// A logarithmically weighted mean: sum of f(n)/n over a range divided by the
// sum of 1/n over the same range.
struct LogAverage {
  double value = 0.0;       // numerator / normalizer
  double numerator = 0.0;
  double normalizer = 0.0;  // sum of the 1/n weights actually used
  u64 term_count = 0;
};

// Mean of f with weights 1/n over integer n in (lo_excl, hi_incl].
template <class F>
LogAverage log_average(u64 lo_excl, u64 hi_incl, F&& f, unsigned threads = 1) {
  if (hi_incl <= lo_excl)
    throw empty_range_error("log average over empty range (" +
                            std::to_string(lo_excl) + ", " +
                            std::to_string(hi_incl) + "]");
  LogAverage r;
  r.term_count = hi_incl - lo_excl;
  r.numerator = sum_over_range(
      lo_excl, hi_incl,
      [&](u64 n) { return f(n) / static_cast<double>(n); }, threads);
  r.normalizer = sum_over_range(
      lo_excl, hi_incl, [](u64 n) { return 1.0 / static_cast<double>(n); },
      threads);
  r.value = r.numerator / r.normalizer;
  return r;
}

// Mean of f with weights 1/p over primes p in (lo_excl, hi_incl].  Composite
// positions contribute exact zeros, so the blocked sum keeps the same shape
// as the all-n version.
template <class F>
LogAverage prime_log_average(const SieveTable& table, u64 lo_excl, u64 hi_incl,
                             F&& f, unsigned threads = 1) {
  if (hi_incl > table.limit())
    throw std::out_of_range("prime log average up to " +
                            std::to_string(hi_incl) +
                            " requires sieve limit >= that, have " +
                            std::to_string(table.limit()));
  const u8* bytes = table.data();
  u64 count = 0;
  for (u64 n = lo_excl + 1; n <= hi_incl; ++n)
    if ((bytes[n] & 0x1F) == 1) ++count;
  if (count == 0)
    throw empty_range_error("no primes in (" + std::to_string(lo_excl) + ", " +
                            std::to_string(hi_incl) + "]");
  LogAverage r;
  r.term_count = count;
  r.numerator = sum_over_range(
      lo_excl, hi_incl,
      [&](u64 n) {
        return (bytes[n] & 0x1F) == 1 ? f(n) / static_cast<double>(n) : 0.0;
      },
      threads);
  r.normalizer = sum_over_range(
      lo_excl, hi_incl,
      [&](u64 n) {
        return (bytes[n] & 0x1F) == 1 ? 1.0 / static_cast<double>(n) : 0.0;
      },
      threads);
  r.value = r.numerator / r.normalizer;
  return r;
}

// Natural (unweighted) mean over primes in (lo_excl, hi_incl].
template <class F>
LogAverage prime_natural_average(const SieveTable& table, u64 lo_excl,
                                 u64 hi_incl, F&& f, unsigned threads = 1) {
  if (hi_incl > table.limit())
    throw std::out_of_range("prime average up to " + std::to_string(hi_incl) +
                            " requires sieve limit >= that, have " +
                            std::to_string(table.limit()));
  const u8* bytes = table.data();
  u64 count = 0;
  for (u64 n = lo_excl + 1; n <= hi_incl; ++n)
    if ((bytes[n] & 0x1F) == 1) ++count;
  if (count == 0)
    throw empty_range_error("no primes in (" + std::to_string(lo_excl) + ", " +
                            std::to_string(hi_incl) + "]");
  LogAverage r;
  r.term_count = count;
  r.numerator = sum_over_range(
      lo_excl, hi_incl,
      [&](u64 n) { return (bytes[n] & 0x1F) == 1 ? f(n) : 0.0; }, threads);
  r.normalizer = static_cast<double>(count);
  r.value = r.numerator / r.normalizer;
  return r;
}

}  // namespace chowla
