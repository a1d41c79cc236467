#pragma once

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "chowla/correlation.hpp"
#include "chowla/log_average.hpp"
#include "chowla/sieve.hpp"
#include "chowla/util.hpp"

namespace chowla {

// ---------------------------------------------------------------------------
// Sign-flip identity: multiplying the argument by a prime flips the sign of
// a completely multiplicative +-1 function.

struct DilationIdentityResult {
  u64 pairs_checked = 0;
  u64 violations = 0;
  bool passed() const { return violations == 0; }
};

inline DilationIdentityResult dilation_identity_check(
    const SieveTable& table, u64 x_small, const std::vector<u64>& primes) {
  DilationIdentityResult r;
  for (u64 p : primes) {
    if (checked_mul(p, x_small) > table.limit())
      throw std::out_of_range("identity check needs sieve limit >= " +
                              std::to_string(p * x_small) + ", have " +
                              std::to_string(table.limit()));
    for (u64 n = 1; n <= x_small; ++n) {
      ++r.pairs_checked;
      if (table.liouville_unchecked(p * n) != -table.liouville_unchecked(n))
        ++r.violations;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Deviation of the dilated correlation from its predicted sign flip, averaged
// over primes in one dyadic block.

namespace detail {

inline CorrelationSpec with_dilation(const CorrelationSpec& spec, u64 d) {
  CorrelationSpec s = spec;
  s.dilation = d;
  return s;
}

inline int parity_sign(unsigned k) { return (k % 2 == 0) ? 1 : -1; }

}  // namespace detail

inline double afe_deviation(const SieveTable& table,
                            const CorrelationSpec& spec, unsigned m,
                            unsigned threads = 1) {
  const auto block = table.primes_in_dyadic(m);
  std::vector<CorrelationSpec> specs;
  specs.push_back(spec);
  for (u64 p : block.primes)
    specs.push_back(detail::with_dilation(spec, checked_mul(spec.dilation, p)));
  const auto vals = log_correlation_batch(table, specs, threads);
  const double base = vals[0].value;
  const int sign = detail::parity_sign(spec.k());
  double acc = 0.0;
  for (std::size_t i = 1; i < vals.size(); ++i)
    acc += std::abs(vals[i].value - sign * base);
  return acc / static_cast<double>(block.primes.size());
}

struct AfeRow {
  unsigned m = 0;
  u64 prime_count = 0;
  double deviation = 0.0;
  bool exceptional = false;
};

struct AfeReport {
  u64 dilation = 1;
  u64 x = 0;
  unsigned k = 0;
  double epsilon = 0.0;
  std::vector<AfeRow> rows;
  double exceptional_mass = 0.0;  // sum of 1/m over flagged rows
  double mass_reference = 0.0;    // dilation * epsilon^-3, for context only
};

// One pass over n evaluates every per-prime slot for the whole m interval;
// rows are then reduced in ascending (m, p) order, so the numbers cannot
// depend on scheduling and match per-m afe_deviation calls exactly.
inline AfeReport afe_scan(const SieveTable& table, const CorrelationSpec& spec,
                          unsigned m_lo, unsigned m_hi, double epsilon,
                          unsigned threads = 1) {
  if (m_lo < 1 || m_lo > m_hi)
    throw std::invalid_argument("bad m interval [" + std::to_string(m_lo) +
                                ", " + std::to_string(m_hi) + "]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");

  std::vector<PrimeDyadicRange> blocks;
  std::vector<CorrelationSpec> specs;
  specs.push_back(spec);
  for (unsigned m = m_lo; m <= m_hi; ++m) {
    blocks.push_back(table.primes_in_dyadic(m));
    for (u64 p : blocks.back().primes)
      specs.push_back(
          detail::with_dilation(spec, checked_mul(spec.dilation, p)));
  }
  const auto vals = log_correlation_batch(table, specs, threads);
  const double base = vals[0].value;
  const int sign = detail::parity_sign(spec.k());

  AfeReport rep;
  rep.dilation = spec.dilation;
  rep.x = spec.x;
  rep.k = spec.k();
  rep.epsilon = epsilon;
  rep.mass_reference =
      static_cast<double>(spec.dilation) / (epsilon * epsilon * epsilon);
  std::size_t at = 1;
  for (const auto& block : blocks) {
    AfeRow row;
    row.m = block.m;
    row.prime_count = block.primes.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < block.primes.size(); ++i)
      acc += std::abs(vals[at + i].value - sign * base);
    at += block.primes.size();
    row.deviation = acc / static_cast<double>(row.prime_count);
    row.exceptional = row.deviation > epsilon;
    if (row.exceptional) rep.exceptional_mass += 1.0 / row.m;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Shift invariance of the logarithmic average.  The deviation between the
// j-shifted and unshifted averages is bounded by an exact total-variation
// sum; after telescoping, that budget is 2 * sum of 1/n over the j integers
// just past the cutoff, divided by the normalizer.  No asymptotic constants.

enum class ShiftProbe { kLiouville, kConstantOne };

struct ShiftInvarianceResult {
  std::vector<double> deviations;  // index j, starting at j = 0
  std::vector<double> budgets;
  double max_deviation = 0.0;
  double max_budget = 0.0;
  bool within_budget = true;
};

inline ShiftInvarianceResult shift_invariance_check(
    const SieveTable& table, u64 x, double epsilon, u64 j_max,
    ShiftProbe probe = ShiftProbe::kLiouville, unsigned threads = 1) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1)");
  const u64 cut = static_cast<u64>(std::pow(static_cast<double>(x), epsilon));
  if (cut >= x) throw std::invalid_argument("cutoff leaves no terms");
  if (j_max > cut / 2)
    throw std::invalid_argument("j_max " + std::to_string(j_max) +
                                " exceeds half the cutoff " +
                                std::to_string(cut));
  if (x + j_max > table.limit())
    throw std::out_of_range("shift check needs sieve limit >= " +
                            std::to_string(x + j_max) + ", have " +
                            std::to_string(table.limit()));

  const u8* bytes = table.data();
  const bool constant = probe == ShiftProbe::kConstantOne;
  const auto nums = sum_over_range_multi(
      cut, x, static_cast<std::size_t>(j_max) + 1,
      [&](u64 n, std::span<double> out) {
        const double inv = 1.0 / static_cast<double>(n);
        for (u64 j = 0; j <= j_max; ++j) {
          const int s =
              constant ? 1 : 1 - 2 * static_cast<int>(bytes[n + j] & 1);
          out[j] = s * inv;
        }
      },
      threads);
  const double den = sum_over_range(
      cut, x, [](u64 n) { return 1.0 / static_cast<double>(n); }, threads);

  ShiftInvarianceResult r;
  double head = 0.0;  // sum of 1/n over (cut, cut+j]
  for (u64 j = 0; j <= j_max; ++j) {
    if (j > 0) head += 1.0 / static_cast<double>(cut + j);
    const double dev = std::abs(nums[j] - nums[0]) / den;
    const double budget = 2.0 * head / den;
    r.deviations.push_back(dev);
    r.budgets.push_back(budget);
    r.max_deviation = std::max(r.max_deviation, dev);
    r.max_budget = std::max(r.max_budget, budget);
    if (dev > budget + 1e-12) r.within_budget = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Primes versus W-coprime comparison.

struct CompareSpec {
  unsigned w = 3;
  u64 h_minus = 16;
  u64 h_plus = 4096;
  u64 h1 = 16;
  u64 h2 = 64;
  u64 h3 = 256;
  u64 h4 = 4096;
  u64 dilation = 1;  // the fixed factor multiplying every prime/integer slot

  u64 W() const { return primorial(w); }

  void validate() const {
    if (!(1 < w && w < h1 && h1 < h2 && h2 < h3 && h3 < h4))
      throw std::invalid_argument(
          "threshold ladder must satisfy 1 < w < H1 < H2 < H3 < H4");
    if (h_minus > h_plus)
      throw std::invalid_argument("H_minus must not exceed H_plus");
    if (dilation == 0 || dilation > h_plus)
      throw std::invalid_argument("dilation must lie in [1, H_plus]");
  }
};

struct CompareResult {
  double lhs = 0.0;  // log average over primes in the block
  double rhs = 0.0;  // log average over W-coprime integers in the block
  double gap = 0.0;
  u64 prime_terms = 0;
  u64 coprime_terms = 0;
};

inline CompareResult compare_primes_vs_coprime(const SieveTable& table,
                                               const CorrelationSpec& spec,
                                               const CompareSpec& cs,
                                               unsigned m,
                                               unsigned threads = 1) {
  cs.validate();
  if (spec.dilation != cs.dilation)
    throw std::invalid_argument("correlation dilation must match CompareSpec");
  const u64 two_m = u64{1} << m;
  if (two_m < cs.h_minus || two_m > cs.h_plus)
    throw std::invalid_argument("2^m = " + std::to_string(two_m) +
                                " outside [H_minus, H_plus] = [" +
                                std::to_string(cs.h_minus) + ", " +
                                std::to_string(cs.h_plus) + "]");
  const auto block = table.primes_in_dyadic(m);
  const u64 W = cs.W();
  std::vector<u64> coprime;
  for (u64 n = block.low + 1; n <= block.high; ++n)
    if (std::gcd(n, W) == 1) coprime.push_back(n);
  if (coprime.empty())
    throw empty_range_error("no integers coprime to " + std::to_string(W) +
                            " in (" + std::to_string(block.low) + ", " +
                            std::to_string(block.high) + "]");

  std::vector<CorrelationSpec> specs;
  for (u64 p : block.primes)
    specs.push_back(detail::with_dilation(spec, checked_mul(spec.dilation, p)));
  for (u64 n : coprime)
    specs.push_back(detail::with_dilation(spec, checked_mul(spec.dilation, n)));
  const auto vals = log_correlation_batch(table, specs, threads);

  CompareResult r;
  r.prime_terms = block.primes.size();
  r.coprime_terms = coprime.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < block.primes.size(); ++i) {
    num += vals[i].value / static_cast<double>(block.primes[i]);
    den += 1.0 / static_cast<double>(block.primes[i]);
  }
  r.lhs = num / den;
  num = den = 0.0;
  for (std::size_t i = 0; i < coprime.size(); ++i) {
    num += vals[block.primes.size() + i].value / static_cast<double>(coprime[i]);
    den += 1.0 / static_cast<double>(coprime[i]);
  }
  r.rhs = num / den;
  r.gap = r.lhs - r.rhs;
  return r;
}

// ---------------------------------------------------------------------------
// The divisor-counting weight and its first two moments.

// Log-weighted count of primes in (h1, h2] dividing n, normalized so a
// "typical" n scores about 1.
inline double divisor_weight(const SieveTable& table, u64 n, u64 h1, u64 h2) {
  if (h1 >= h2) throw std::invalid_argument("need H1 < H2");
  const auto primes = table.primes_in(h1, h2);
  if (primes.empty())
    throw empty_range_error("no primes in (" + std::to_string(h1) + ", " +
                            std::to_string(h2) + "]");
  double num = 0.0, den = 0.0;
  for (u64 p : primes) {
    if (n % p == 0) num += 1.0;
    den += 1.0 / static_cast<double>(p);
  }
  return num / den;
}

struct WeightMoments {
  double m1 = 0.0;  // log average of the weight over W-coprime n
  double m2 = 0.0;  // same for its square
  u64 coprime_terms = 0;
};

inline WeightMoments divisor_weight_moments(const SieveTable& table,
                                            const CompareSpec& cs,
                                            unsigned threads = 1) {
  cs.validate();
  if (cs.h4 > table.limit())
    throw std::out_of_range("moments need sieve limit >= " +
                            std::to_string(cs.h4) + ", have " +
                            std::to_string(table.limit()));
  const auto primes = table.primes_in(cs.h1, cs.h2);
  if (primes.empty())
    throw empty_range_error("no primes in (" + std::to_string(cs.h1) + ", " +
                            std::to_string(cs.h2) + "]");
  double L = 0.0;
  for (u64 p : primes) L += 1.0 / static_cast<double>(p);

  // Divisor counts for the whole window, sieved once.
  const u64 lo = cs.h3, hi = cs.h4;
  std::vector<u8> cnt(hi - lo, 0);
  for (u64 p : primes)
    for (u64 q = (lo / p + 1) * p; q <= hi; q += p) ++cnt[q - lo - 1];

  const u64 W = cs.W();
  WeightMoments r;
  u64 coprime_terms = 0;
  for (u64 n = lo + 1; n <= hi; ++n)
    if (std::gcd(n, W) == 1) ++coprime_terms;
  r.coprime_terms = coprime_terms;
  if (coprime_terms == 0)
    throw empty_range_error("no integers coprime to W in the moment window");

  const auto sums = sum_over_range_multi(
      lo, hi, 3,
      [&](u64 n, std::span<double> out) {
        if (std::gcd(n, W) != 1) {
          out[0] = out[1] = out[2] = 0.0;
          return;
        }
        const double g = cnt[n - lo - 1] / L;
        const double inv = 1.0 / static_cast<double>(n);
        out[0] = g * inv;
        out[1] = g * g * inv;
        out[2] = inv;
      },
      threads);
  r.m1 = sums[0] / sums[2];
  r.m2 = sums[1] / sums[2];
  return r;
}

struct DivisorDensity {
  double density = 0.0;
  double scaled = 0.0;  // p1 * density, sits near 1 on healthy windows
  u64 coprime_terms = 0;
};

inline DivisorDensity divisor_density(const SieveTable& table, u64 p1, u64 h3,
                                      u64 h4, u64 W, unsigned threads = 1) {
  if (h3 >= h4) throw std::invalid_argument("need H3 < H4");
  if (h4 > table.limit())
    throw std::out_of_range("density needs sieve limit >= " +
                            std::to_string(h4) + ", have " +
                            std::to_string(table.limit()));
  if (W == 0) throw std::invalid_argument("W must be positive");
  if (!is_prime_u64(p1))
    throw std::invalid_argument(std::to_string(p1) + " is not prime");
  if (std::gcd(p1, W) != 1)
    throw std::invalid_argument(std::to_string(p1) + " divides W = " +
                                std::to_string(W));
  const auto sums = sum_over_range_multi(
      h3, h4, 2,
      [&](u64 n, std::span<double> out) {
        if (std::gcd(n, W) != 1) {
          out[0] = out[1] = 0.0;
          return;
        }
        const double inv = 1.0 / static_cast<double>(n);
        out[0] = (n % p1 == 0) ? inv : 0.0;
        out[1] = inv;
      },
      threads);
  if (sums[1] == 0.0)
    throw empty_range_error("no integers coprime to W in the density window");
  DivisorDensity r;
  r.density = sums[0] / sums[1];
  r.scaled = static_cast<double>(p1) * r.density;
  u64 terms = 0;
  for (u64 n = h3 + 1; n <= h4; ++n)
    if (std::gcd(n, W) == 1) ++terms;
  r.coprime_terms = terms;
  return r;
}

// ---------------------------------------------------------------------------
// The full derivation chain at one parameter ladder.

struct ChainRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

struct ChainReport {
  unsigned k = 0;
  u64 x = 0;
  CompareSpec ladder;
  std::vector<ChainRow> rows;
  double headline = 0.0;  // |f_x(1)|
};

inline ChainReport chain_report(const SieveTable& table,
                                const CorrelationSpec& spec,
                                const CompareSpec& cs, unsigned threads = 1) {
  cs.validate();
  if (spec.k() % 2 == 0)
    throw std::invalid_argument("the derivation chain needs odd k");
  if (spec.dilation != 1)
    throw std::invalid_argument("the chain starts from dilation 1");
  if (spec.mode != CorrelationMode::kLiouville)
    throw std::invalid_argument("the chain is a Liouville-mode statement");

  const auto p12 = table.primes_in(cs.h1, cs.h2);
  const auto p34 = table.primes_in(cs.h3, cs.h4);
  if (p12.empty() || p34.empty())
    throw empty_range_error("a prime window in the ladder is empty");
  const u64 W = cs.W();
  std::vector<u64> n34;
  for (u64 n = cs.h3 + 1; n <= cs.h4; ++n)
    if (std::gcd(n, W) == 1) n34.push_back(n);
  if (n34.empty()) throw empty_range_error("no W-coprime integers in (H3, H4]");

  // Deduplicate every dilation the chain touches into one batch.
  std::map<u64, std::size_t> slot;
  auto want = [&](u64 d) { slot.emplace(d, 0); };
  want(1);
  for (u64 p1 : p12) want(p1);
  for (u64 p : p34) want(p);
  for (u64 p1 : p12)
    for (u64 p2 : p34) want(checked_mul(p1, p2));
  for (u64 n : n34) want(n);
  for (u64 p1 : p12)
    for (u64 n : n34) want(checked_mul(p1, n));
  {
    std::size_t i = 0;
    for (auto& [d, idx] : slot) idx = i++;
  }
  std::vector<CorrelationSpec> specs;
  specs.reserve(slot.size());
  for (const auto& [d, idx] : slot)
    specs.push_back(detail::with_dilation(spec, d));
  const auto vals = log_correlation_batch(table, specs, threads);
  auto f = [&](u64 d) { return vals[slot.at(d)].value; };

  // log-weighted mean of g over an ascending list of moduli
  auto log_mean_over = [&](const std::vector<u64>& ms, auto&& g) {
    double num = 0.0, den = 0.0;
    for (u64 v : ms) {
      num += g(v) / static_cast<double>(v);
      den += 1.0 / static_cast<double>(v);
    }
    return num / den;
  };

  const double f1 = f(1);
  const double e1 = log_mean_over(p12, [&](u64 p1) { return f(p1); });
  const double e2 = log_mean_over(p34, [&](u64 p) { return f(p); });
  const double e3 = log_mean_over(p12, [&](u64 p1) {
    return log_mean_over(p34, [&](u64 p2) { return f(p1 * p2); });
  });
  const double e5l = log_mean_over(n34, [&](u64 n) { return f(n); });
  const double e5r = log_mean_over(p12, [&](u64 p1) {
    return log_mean_over(n34, [&](u64 n) { return f(p1 * n); });
  });

  ChainReport rep;
  rep.k = spec.k();
  rep.x = spec.x;
  rep.ladder = cs;
  rep.headline = std::abs(f1);
  auto row = [&](const char* name, double lhs, double rhs) {
    rep.rows.push_back({name, lhs, rhs, lhs - rhs});
  };
  row("base_vs_small_primes", f1, -e1);
  row("base_vs_large_primes", f1, -e2);
  row("base_vs_semiprimes", f1, +e3);
  row("primes_vs_semiprimes", e2, e3);
  row("coprime_vs_lifted", e5l, e5r);
  return rep;
}

// ---------------------------------------------------------------------------
// Exact identity checks.

// Both sides of the prime change of variables, summed over the identical
// term sequence: sum over multiples of p up to p*x of h(n) * p / n equals
// the sum over n up to x of h(pn) / n, term by term, because p/(pn) and 1/n
// round to the same double.  Bitwise equality is therefore expected.
struct ChangeOfVariablesResult {
  double multiples_numerator = 0.0;  // over (0, px], weight p/n on p | n
  double dilated_numerator = 0.0;    // over (0, x], weight 1/n at h(pn)
  double norm_px = 0.0;              // sum of 1/n over (0, px]
  double norm_x = 0.0;               // sum of 1/n over (0, x]
  bool exact_match = false;
};

inline ChangeOfVariablesResult change_of_variables_check(
    const SieveTable& table, const CorrelationSpec& spec, u64 p) {
  spec.validate();
  if (spec.use_lower_cutoff)
    throw std::invalid_argument("change of variables check uses the full range");
  // h(u) = product of Liouville values at a_j * u + (a p) b_j; the two sums
  // evaluate it at u = m over multiples of p, and at u = p n.
  CorrelationSpec probe = detail::with_dilation(spec, checked_mul(spec.dilation, p));
  probe.x = checked_mul(spec.x, p);
  probe.validate();
  if (probe.required_limit() > table.limit())
    throw std::out_of_range("change of variables needs sieve limit >= " +
                            std::to_string(probe.required_limit()) +
                            ", have " + std::to_string(table.limit()));
  const auto compiled = detail::compile(probe);
  const u8* bytes = table.data();
  auto h_at = [&](u64 u) {
    int sign = 1;
    for (const auto& fac : compiled.factors) {
      const u64 arg =
          static_cast<u64>(static_cast<i64>(fac.a * u) + fac.shift);
      sign *= 1 - 2 * static_cast<int>(bytes[arg] & 1);
    }
    return sign;
  };

  ChangeOfVariablesResult r;
  {
    double s = 0.0, c = 0.0;
    for (u64 m = p; m <= p * spec.x; m += p) {
      const double term =
          h_at(m) * (static_cast<double>(p) / static_cast<double>(m));
      const double y = term - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    r.multiples_numerator = s;
  }
  {
    double s = 0.0, c = 0.0;
    for (u64 n = 1; n <= spec.x; ++n) {
      const double term = h_at(p * n) * (1.0 / static_cast<double>(n));
      const double y = term - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    r.dilated_numerator = s;
  }
  r.norm_px = sum_over_range(0, p * spec.x,
                             [](u64 n) { return 1.0 / static_cast<double>(n); });
  r.norm_x = sum_over_range(0, spec.x,
                            [](u64 n) { return 1.0 / static_cast<double>(n); });
  r.exact_match = r.multiples_numerator == r.dilated_numerator;
  return r;
}

// Decomposition of f_x(a) - (-1)^k f_x(ap) into the divisor-weighted main
// term plus a boundary piece supported on (x, px].  The boundary is bounded
// by p * sum of 1/n over multiples of p in (x, px], computed exactly rather
// than through an asymptotic constant.
struct IdentityCheckResult {
  double lhs = 0.0;        // f_x(a) - (-1)^k f_x(ap)
  double main_term = 0.0;  // (-1)^k E^log of h * (p 1_{p|n} - 1) over (0, x]
  double boundary = 0.0;   // lhs - main_term
  double budget = 0.0;     // exact bound for |boundary|
  bool within_budget = false;
};

inline IdentityCheckResult afe_identity_check(const SieveTable& table,
                                              const CorrelationSpec& spec,
                                              u64 p, unsigned threads = 1) {
  spec.validate();
  if (spec.use_lower_cutoff)
    throw std::invalid_argument("identity check uses the full range");
  const CorrelationSpec dil =
      detail::with_dilation(spec, checked_mul(spec.dilation, p));
  const auto vals = log_correlation_batch(table, {spec, dil}, threads);
  const int sign = detail::parity_sign(spec.k());

  // E^log over (0, x] of h(n) * (p 1_{p|n} - 1) with h at dilation a*p.
  const auto compiled = detail::compile(dil);
  const u8* bytes = table.data();
  const double num = sum_over_range(
      0, spec.x,
      [&](u64 n) {
        int s = 1;
        for (const auto& fac : compiled.factors) {
          const u64 arg =
              static_cast<u64>(static_cast<i64>(fac.a * n) + fac.shift);
          s *= 1 - 2 * static_cast<int>(bytes[arg] & 1);
        }
        const double weight =
            (n % p == 0) ? static_cast<double>(p) - 1.0 : -1.0;
        return s * weight / static_cast<double>(n);
      },
      threads);
  const double L = vals[0].normalizer;

  IdentityCheckResult r;
  r.lhs = vals[0].value - sign * vals[1].value;
  r.main_term = sign * num / L;
  r.boundary = r.lhs - r.main_term;
  double tail = 0.0;  // p * sum over multiples of p in (x, px]
  for (u64 m = (spec.x / p + 1) * p; m <= p * spec.x; m += p)
    tail += static_cast<double>(p) / static_cast<double>(m);
  r.budget = tail / L + 1e-9;  // tiny float slack on top of the exact bound
  r.within_budget = std::abs(r.boundary) <= r.budget;
  return r;
}

}  // namespace chowla
