#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "chowla/entropy.hpp"
#include "chowla/sieve.hpp"
#include "chowla/util.hpp"

namespace chowla {

// Law of a random integer drawn from (lower, x] with probability
// proportional to 1/n.
struct LogDistribution {
  u64 x = 0;
  double epsilon = 0.0;
  u64 lower = 0;   // support is (lower, x]
  double total = 0.0;  // sum of 1/n over the support

  double weight(u64 n) const { return (1.0 / static_cast<double>(n)) / total; }
};

inline LogDistribution log_distribution(u64 x, double epsilon) {
  if (x < 2) throw std::invalid_argument("need x >= 2");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("need 0 < epsilon < 1");
  LogDistribution d;
  d.x = x;
  d.epsilon = epsilon;
  d.lower = static_cast<u64>(std::pow(static_cast<double>(x), epsilon));
  if (d.lower >= x) throw std::invalid_argument("support (x^eps, x] is empty");
  d.total = sum_over_range(d.lower, x,
                           [](u64 n) { return 1.0 / static_cast<double>(n); });
  return d;
}

// Exact signum of the logarithmic average over n <= x of
// lambda(a_1 n + a p b_1) ... lambda(a_k n + a p b_k) (p 1_{p|n} - 1).
inline int compute_c_p(const SieveTable& table, const std::vector<u64>& a_list,
                       const std::vector<u64>& b_list, u64 dilation, u64 p,
                       u64 x) {
  if (a_list.empty() || a_list.size() != b_list.size())
    throw std::invalid_argument("need matching nonempty coefficient lists");
  if (p < 2 || x < 1) throw std::invalid_argument("need p >= 2 and x >= 1");
  u128 required = 0;
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    const u128 arg = static_cast<u128>(a_list[i]) * x +
                     static_cast<u128>(dilation) * p * b_list[i];
    required = std::max(required, arg);
  }
  if (required > table.limit())
    throw std::out_of_range("sign computation needs sieve limit >= " +
                            std::to_string(static_cast<u64>(required)) +
                            ", have " + std::to_string(table.limit()));
  const double s = sum_over_range(0, x, [&](u64 n) {
    double prod = 1.0;
    for (std::size_t i = 0; i < a_list.size(); ++i)
      prod *= table.liouville_unchecked(a_list[i] * n +
                                        dilation * p * b_list[i]);
    const double factor =
        n % p == 0 ? static_cast<double>(p) - 1.0 : -1.0;
    return prod * factor / static_cast<double>(n);
  });
  return (s > 0.0) - (s < 0.0);
}

// Scale-m context: coefficient data, the dyadic prime block, the residue
// moduli below it, and the per-prime signs.
struct DecrementContext {
  std::vector<u64> a_list;
  std::vector<u64> b_list;
  u64 dilation = 1;
  unsigned m = 1;
  u64 B = 0;             // max b_i
  u64 C = 0;             // sum over i of (2aB+1) a_i
  std::vector<u64> block_primes;   // 2^m < p <= 2^{m+1}
  std::vector<u64> prior_primes;   // union of the blocks below m
  std::vector<int> signs;          // c_p per block prime
  std::vector<u64> offsets;        // start of row i in the sign pattern

  u64 window() const { return u64{1} << m; }
  u64 row_length(std::size_t i) const {
    return (2 * dilation * B + 1) * a_list[i] * window();
  }
  u64 pattern_bits() const { return C * window(); }

  // flat index of sign (i, r), r in [1, row_length(i)]
  u64 bit_index(std::size_t i, u64 r) const {
    if (r < 1 || r > row_length(i))
      throw std::logic_error("sign index " + std::to_string(r) +
                             " outside row of length " +
                             std::to_string(row_length(i)));
    return offsets[i] + r - 1;
  }
};

inline DecrementContext make_decrement_context(const SieveTable& table,
                                               const std::vector<u64>& a_list,
                                               const std::vector<u64>& b_list,
                                               u64 dilation, unsigned m,
                                               u64 x) {
  if (a_list.empty() || a_list.size() != b_list.size())
    throw std::invalid_argument("need matching nonempty coefficient lists");
  for (u64 a : a_list)
    if (a < 1) throw std::invalid_argument("coefficients a_i must be >= 1");
  if (dilation < 1) throw std::invalid_argument("dilation must be >= 1");
  if (m < 1 || m > 62) throw std::invalid_argument("need 1 <= m <= 62");

  DecrementContext ctx;
  ctx.a_list = a_list;
  ctx.b_list = b_list;
  ctx.dilation = dilation;
  ctx.m = m;
  ctx.B = *std::max_element(b_list.begin(), b_list.end());
  ctx.C = 0;
  for (u64 a : a_list)
    ctx.C += checked_mul(2 * dilation * ctx.B + 1, a);
  ctx.offsets.resize(a_list.size());
  u64 off = 0;
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    ctx.offsets[i] = off;
    off += ctx.row_length(i);
  }
  ctx.block_primes = table.primes_in_dyadic(m).primes;
  for (unsigned mp = 1; mp < m; ++mp) {
    const auto block = table.primes_in_dyadic(mp).primes;
    ctx.prior_primes.insert(ctx.prior_primes.end(), block.begin(),
                            block.end());
  }
  for (u64 p : ctx.block_primes)
    ctx.signs.push_back(compute_c_p(table, a_list, b_list, dilation, p, x));
  return ctx;
}

namespace detail {

inline u64 mixed_radix_key(u64 n, const std::vector<u64>& moduli) {
  u64 key = 0, stride = 1;
  for (u64 p : moduli) {
    key += (n % p) * stride;
    stride *= p;
  }
  return key;
}

inline std::vector<u64> decode_mixed_radix(u64 key,
                                           const std::vector<u64>& moduli) {
  std::vector<u64> digits(moduli.size());
  for (std::size_t t = 0; t < moduli.size(); ++t) {
    digits[t] = key % moduli[t];
    key /= moduli[t];
  }
  return digits;
}

inline u64 radix_capacity_or_throw(const std::vector<u64>& moduli,
                                   const char* what) {
  u64 capacity = 1;
  for (u64 p : moduli)
    if (__builtin_mul_overflow(capacity, p, &capacity))
      throw resource_error(std::string(what) +
                           " state space exceeds 64-bit keys at this scale; "
                           "use a smaller m");
  return capacity;
}

struct CellKey {
  u64 x, yc, yp;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    u64 h = 0xcbf29ce484222325ULL;
    for (u64 v : {k.x, k.yc, k.yp}) {
      h ^= v;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

enum class SignSource {
  kLiouville,     // signs read from the sieve
  kCounterSigns,  // seeded generator, independent of the residue data
};

// Joint law of (sign pattern, block residues, prior residues), with the
// decoding data needed to map labels back to concrete patterns and tuples.
struct DecrementLaw {
  JointDistribution dist;  // axis 0: pattern bits, 1: block key, 2: prior key
  DecrementContext ctx;
  u64 x = 0;
  u64 support_lo = 0;  // support is (support_lo, x]
  double weight_total = 0.0;
  SignSource source = SignSource::kLiouville;
  u64 seed = 0;
  u64 trials = 0;  // 0 means exact enumeration

  std::vector<u64> block_residues(u64 key) const {
    return detail::decode_mixed_radix(key, ctx.block_primes);
  }
};

namespace detail {

inline void check_law_feasible(const DecrementContext& ctx,
                               const SieveTable& table, u64 x) {
  if (ctx.pattern_bits() > 64)
    throw resource_error(
        "sign pattern needs " + std::to_string(ctx.pattern_bits()) +
        " bits, above the 64-bit exact-mode key; use sampled mode at a "
        "smaller m or drop coefficients");
  radix_capacity_or_throw(ctx.block_primes, "block residue");
  radix_capacity_or_throw(ctx.prior_primes, "prior residue");
  u128 required = 0;
  for (std::size_t i = 0; i < ctx.a_list.size(); ++i)
    required = std::max(required, static_cast<u128>(ctx.a_list[i]) * x +
                                      ctx.row_length(i));
  if (required > table.limit())
    throw std::out_of_range("joint law at x = " + std::to_string(x) +
                            " needs sieve limit >= " +
                            std::to_string(static_cast<u64>(required)) +
                            ", have " + std::to_string(table.limit()));
}

inline u64 pattern_bits_of(const DecrementContext& ctx, const SieveTable& table,
                           u64 n, SignSource source, const CounterRng& rng) {
  u64 bits = 0;
  if (source == SignSource::kLiouville) {
    for (std::size_t i = 0; i < ctx.a_list.size(); ++i) {
      const u64 base = ctx.a_list[i] * n;
      const u64 len = ctx.row_length(i);
      for (u64 r = 1; r <= len; ++r)
        if (table.liouville_unchecked(base + r) > 0)
          bits |= u64{1} << (ctx.offsets[i] + r - 1);
    }
  } else {
    const u64 width = ctx.pattern_bits();
    for (u64 idx = 0; idx < width; ++idx)
      if (rng.at(n * width + idx) & 1) bits |= u64{1} << idx;
  }
  return bits;
}

using BucketMap =
    std::unordered_map<CellKey, std::pair<double, double>, CellKeyHash>;

inline DecrementLaw finalize_law(BucketMap&& buckets, DecrementContext ctx,
                                 u64 x, u64 lower, SignSource source, u64 seed,
                                 u64 trials) {
  std::vector<std::pair<CellKey, double>> cells;
  cells.reserve(buckets.size());
  for (const auto& [key, acc] : buckets) cells.emplace_back(key, acc.first);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.x, a.first.yc, a.first.yp) <
           std::tie(b.first.x, b.first.yc, b.first.yp);
  });
  double total = 0.0, comp = 0.0;
  for (const auto& [key, w] : cells) {
    const double y = w - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  DecrementLaw law;
  law.dist.arity = 3;
  law.dist.labels.reserve(cells.size() * 3);
  law.dist.probs.reserve(cells.size());
  for (const auto& [key, w] : cells) {
    law.dist.labels.insert(law.dist.labels.end(), {key.x, key.yc, key.yp});
    law.dist.probs.push_back(w / total);
  }
  law.ctx = std::move(ctx);
  law.x = x;
  law.support_lo = lower;
  law.weight_total = total;
  law.source = source;
  law.seed = seed;
  law.trials = trials;
  return law;
}

}  // namespace detail

// Exact joint law by one weighted pass over the support: every n is
// bucketed by its (pattern, block residues, prior residues) value with
// weight 1/n, then buckets are normalized.
inline DecrementLaw sample_X_Y(const DecrementContext& ctx,
                               const LogDistribution& dist,
                               const SieveTable& table,
                               SignSource source = SignSource::kLiouville,
                               u64 seed = 0) {
  if (dist.x - dist.lower > (u64{1} << 27))
    throw resource_error("exact bucketing over " +
                         std::to_string(dist.x - dist.lower) +
                         " support points is infeasible; use sampled mode");
  detail::check_law_feasible(ctx, table, dist.x);
  const CounterRng rng(seed);
  detail::BucketMap buckets;
  for (u64 n = dist.lower + 1; n <= dist.x; ++n) {
    const detail::CellKey key{
        detail::pattern_bits_of(ctx, table, n, source, rng),
        detail::mixed_radix_key(n, ctx.block_primes),
        detail::mixed_radix_key(n, ctx.prior_primes)};
    auto& acc = buckets[key];
    const double w = 1.0 / static_cast<double>(n);
    const double y = w - acc.second;
    const double t = acc.first + y;
    acc.second = (t - acc.first) - y;
    acc.first = t;
  }
  return detail::finalize_law(std::move(buckets), ctx, dist.x, dist.lower,
                              source, seed, 0);
}

// Monte Carlo fallback: draws from the logarithmic law through an alias
// table and buckets the draws with unit weight.  Probabilities are
// empirical frequencies; entropies computed from them carry estimator
// noise, so this mode is for scales where the exact pass is infeasible.
inline DecrementLaw sample_X_Y_sampled(const DecrementContext& ctx,
                                       const LogDistribution& dist,
                                       const SieveTable& table, u64 trials,
                                       u64 seed,
                                       SignSource source = SignSource::kLiouville) {
  detail::check_law_feasible(ctx, table, dist.x);
  if (trials < 1) throw std::invalid_argument("need at least one draw");
  const u64 span = dist.x - dist.lower;
  if (span > (u64{1} << 31))
    throw resource_error("alias table over " + std::to_string(span) +
                         " support points does not fit the sampled mode");

  // alias method: O(1) per draw after an O(support) setup
  const auto size = static_cast<std::size_t>(span);
  std::vector<double> accept(size);
  std::vector<u32> alias(size);
  {
    std::vector<double> scaled(size);
    for (std::size_t i = 0; i < size; ++i)
      scaled[i] = dist.weight(dist.lower + 1 + i) * static_cast<double>(size);
    std::vector<u32> small, large;
    for (std::size_t i = 0; i < size; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<u32>(i));
    while (!small.empty() && !large.empty()) {
      const u32 s = small.back(), l = large.back();
      small.pop_back();
      accept[s] = scaled[s];
      alias[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (u32 i : large) accept[i] = 1.0;
    for (u32 i : small) accept[i] = 1.0;  // numerical leftovers
  }

  const CounterRng rng(seed);
  const CounterRng pattern_rng(seed ^ 0x5851f42d4c957f2dULL);
  detail::BucketMap buckets;
  for (u64 t = 0; t < trials; ++t) {
    const u64 slot = rng.below(2 * t, span);
    const double u = rng.uniform01(2 * t + 1);
    const u64 idx = u < accept[slot] ? slot : alias[slot];
    const u64 n = dist.lower + 1 + idx;
    const detail::CellKey key{
        detail::pattern_bits_of(ctx, table, n, source, pattern_rng),
        detail::mixed_radix_key(n, ctx.block_primes),
        detail::mixed_radix_key(n, ctx.prior_primes)};
    auto& acc = buckets[key];
    acc.first += 1.0;
  }
  for (auto& [key, acc] : buckets)
    acc.first /= static_cast<double>(trials);
  DecrementLaw law = detail::finalize_law(std::move(buckets), ctx, dist.x,
                                          dist.lower, source, seed, trials);
  return law;
}

// ---------------------------------------------------------------------------
// The averaged statistic.

// F at a concrete sign pattern and residue tuple: average over the prime
// block and the window j <= 2^m of
//   c_p * b_{1, a_1 j + a p b_1} * ... * b_{k, a_k j + a p b_k}
//     * (p 1_{p | n_p + j} - 1).
inline double evaluate_F_m(const DecrementContext& ctx,
                           const std::vector<int>& pattern,
                           const std::vector<u64>& residues) {
  if (pattern.size() != ctx.pattern_bits())
    throw std::invalid_argument("pattern has " +
                                std::to_string(pattern.size()) +
                                " signs, context needs " +
                                std::to_string(ctx.pattern_bits()));
  for (int s : pattern)
    if (s != 1 && s != -1)
      throw std::invalid_argument("pattern entries must be +1 or -1");
  if (residues.size() != ctx.block_primes.size())
    throw std::invalid_argument("need one residue per block prime");
  for (std::size_t t = 0; t < residues.size(); ++t)
    if (residues[t] >= ctx.block_primes[t])
      throw std::invalid_argument("residue " + std::to_string(residues[t]) +
                                  " not reduced mod " +
                                  std::to_string(ctx.block_primes[t]));

  const u64 J = ctx.window();
  double over_p = 0.0, pcomp = 0.0;
  for (std::size_t t = 0; t < ctx.block_primes.size(); ++t) {
    const u64 p = ctx.block_primes[t];
    double over_j = 0.0, jcomp = 0.0;
    for (u64 j = 1; j <= J; ++j) {
      double prod = static_cast<double>(ctx.signs[t]);
      for (std::size_t i = 0; i < ctx.a_list.size(); ++i) {
        const u64 r = ctx.a_list[i] * j + ctx.dilation * p * ctx.b_list[i];
        prod *= pattern[ctx.bit_index(i, r)];
      }
      const double factor = (residues[t] + j) % p == 0
                                ? static_cast<double>(p) - 1.0
                                : -1.0;
      const double y = prod * factor - jcomp;
      const double tt = over_j + y;
      jcomp = (tt - over_j) - y;
      over_j = tt;
    }
    const double y = over_j / static_cast<double>(J) - pcomp;
    const double tt = over_p + y;
    pcomp = (tt - over_p) - y;
    over_p = tt;
  }
  return over_p / static_cast<double>(ctx.block_primes.size());
}

namespace detail {

inline std::vector<int> unpack_pattern(const DecrementContext& ctx, u64 bits) {
  std::vector<int> pattern(ctx.pattern_bits());
  for (std::size_t i = 0; i < pattern.size(); ++i)
    pattern[i] = bits & (u64{1} << i) ? 1 : -1;
  return pattern;
}

}  // namespace detail

// Expectation of F over a computed joint law (pattern and block-residue
// axes; the prior axis is marginalized by the sum itself).
inline double law_average_F(const DecrementLaw& law) {
  double acc = 0.0, comp = 0.0;
  for (std::size_t c = 0; c < law.dist.cell_count(); ++c) {
    const u64* cell = law.dist.cell(c);
    const double f = evaluate_F_m(law.ctx,
                                  detail::unpack_pattern(law.ctx, cell[0]),
                                  law.ctx.block_primes.empty()
                                      ? std::vector<u64>{}
                                      : law.block_residues(cell[1]));
    const double y = f * law.dist.probs[c] - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc;
}

// The same expectation computed directly: a weighted pass over n reading
// every sign from the sieve, with no pattern indexing.  Used to validate
// the bucketing and the index layout against each other.
inline double direct_average_Z(const DecrementContext& ctx,
                               const LogDistribution& dist,
                               const SieveTable& table) {
  detail::check_law_feasible(ctx, table, dist.x);
  const u64 J = ctx.window();
  const double num = sum_over_range(dist.lower, dist.x, [&](u64 n) {
    double over_p = 0.0;
    for (std::size_t t = 0; t < ctx.block_primes.size(); ++t) {
      const u64 p = ctx.block_primes[t];
      double over_j = 0.0;
      for (u64 j = 1; j <= J; ++j) {
        double prod = static_cast<double>(ctx.signs[t]);
        for (std::size_t i = 0; i < ctx.a_list.size(); ++i)
          prod *= table.liouville_unchecked(ctx.a_list[i] * (n + j) +
                                            ctx.dilation * p * ctx.b_list[i]);
        prod *= (n + j) % p == 0 ? static_cast<double>(p) - 1.0 : -1.0;
        over_j += prod;
      }
      over_p += over_j / static_cast<double>(J);
    }
    return over_p / static_cast<double>(ctx.block_primes.size()) /
           static_cast<double>(n);
  });
  return num / dist.total;
}

// ---------------------------------------------------------------------------
// Tail behaviour of F under uniform residues.

struct HoeffdingResult {
  double empirical_tail = 0.0;
  double max_abs_f = 0.0;
  std::vector<double> per_prime_means;  // empirical mean of each summand
  bool exact_mean_zero = false;         // integer-arithmetic verification
  u64 trials = 0;
  u64 seed = 0;
};

// Draws the residue tuple uniformly and measures how often |F| >= eps.
// The mean-zero property of each summand is also established exactly: for
// fixed j, summing p*1_{p | u + j} - 1 over a full residue period gives
// p - p = 0 in integer arithmetic.
inline HoeffdingResult hoeffding_tail_check(const DecrementContext& ctx,
                                            const std::vector<int>& pattern,
                                            double eps, u64 trials, u64 seed) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (!(eps > 0.0)) throw std::invalid_argument("need eps > 0");
  // validates the pattern shape and entries through the shared evaluator
  evaluate_F_m(ctx, pattern,
               std::vector<u64>(ctx.block_primes.size(), 0));

  HoeffdingResult res;
  res.trials = trials;
  res.seed = seed;
  res.exact_mean_zero = true;
  for (u64 p : ctx.block_primes)
    for (u64 j = 1; j <= ctx.window(); ++j) {
      i64 sum = 0;
      for (u64 u = 0; u < p; ++u)
        sum += (u + j) % p == 0 ? static_cast<i64>(p) - 1 : -1;
      if (sum != 0)
        throw std::logic_error("summand mean over a full period is nonzero");
    }

  const CounterRng rng(seed);
  const std::size_t np = ctx.block_primes.size();
  u64 hits = 0;
  std::vector<double> mean_sum(np, 0.0), mean_comp(np, 0.0);
  std::vector<u64> residues(np);
  const u64 J = ctx.window();
  for (u64 t = 0; t < trials; ++t) {
    for (std::size_t idx = 0; idx < np; ++idx)
      residues[idx] = rng.below(t * np + idx, ctx.block_primes[idx]);
    // per-prime summand, reusing the pattern product per (p, j)
    double over_p = 0.0;
    for (std::size_t idx = 0; idx < np; ++idx) {
      const u64 p = ctx.block_primes[idx];
      double w_p = 0.0;
      for (u64 j = 1; j <= J; ++j) {
        double prod = static_cast<double>(ctx.signs[idx]);
        for (std::size_t i = 0; i < ctx.a_list.size(); ++i) {
          const u64 r = ctx.a_list[i] * j + ctx.dilation * p * ctx.b_list[i];
          prod *= pattern[ctx.bit_index(i, r)];
        }
        prod *= (residues[idx] + j) % p == 0 ? static_cast<double>(p) - 1.0
                                             : -1.0;
        w_p += prod;
      }
      w_p /= static_cast<double>(J);
      const double y = w_p - mean_comp[idx];
      const double tt = mean_sum[idx] + y;
      mean_comp[idx] = (tt - mean_sum[idx]) - y;
      mean_sum[idx] = tt;
      over_p += w_p;
    }
    const double f = over_p / static_cast<double>(np);
    res.max_abs_f = std::max(res.max_abs_f, std::abs(f));
    if (std::abs(f) >= eps) ++hits;
  }
  res.empirical_tail =
      static_cast<double>(hits) / static_cast<double>(trials);
  res.per_prime_means.resize(np);
  for (std::size_t idx = 0; idx < np; ++idx)
    res.per_prime_means[idx] = mean_sum[idx] / static_cast<double>(trials);
  return res;
}

// ---------------------------------------------------------------------------
// Near-uniformity of the block residues given the prior residues.

struct NearUniformityResult {
  double max_deviation = 0.0;  // over observed conditional cells
  double budget = 0.0;         // exact class-sum bound, for context
  double uniform_target = 0.0; // 1 / prod of block primes
  u64 conditioning_cells = 0;
  u64 skipped_cells = 0;       // (prior, block) combinations never observed
  bool within_budget = false;
};

// Compares each conditional law P(block residues | prior residues) against
// the uniform value.  The budget comes from the elementary class-sum bound
// |sum_{n = b mod M, n in (L, x]} 1/n - (1/M) sum 1/n| <= 3/L + M/L^2
// (blockwise comparison of one class term against the block average, plus
// boundary blocks), propagated through the conditional ratio.
inline NearUniformityResult near_uniformity_check(const DecrementLaw& law) {
  const u64 q = detail::radix_capacity_or_throw(law.ctx.block_primes,
                                                "block residue");
  const u64 Q = detail::radix_capacity_or_throw(law.ctx.prior_primes,
                                                "prior residue");
  const double L = static_cast<double>(std::max<u64>(law.support_lo, 1));
  const auto class_bound = [&](double modulus) {
    return 3.0 / L + modulus / (L * L);
  };

  // group cells by the prior key; within a group, masses per block key
  std::vector<std::pair<std::pair<u64, u64>, double>> rows;
  rows.reserve(law.dist.cell_count());
  for (std::size_t c = 0; c < law.dist.cell_count(); ++c) {
    const u64* cell = law.dist.cell(c);
    rows.push_back({{cell[2], cell[1]}, law.dist.probs[c]});
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  NearUniformityResult res;
  res.uniform_target = 1.0 / static_cast<double>(q);
  const double qd = static_cast<double>(q);
  const double cond_err =
      class_bound(static_cast<double>(q) * static_cast<double>(Q)) +
      (Q > 1 ? class_bound(static_cast<double>(Q)) / qd : 0.0);

  std::size_t i = 0;
  double worst_budget = 0.0;
  while (i < rows.size()) {
    std::size_t j = i;
    double mass = 0.0, comp = 0.0;
    for (; j < rows.size() && rows[j].first.first == rows[i].first.first; ++j) {
      const double y = rows[j].second - comp;
      const double t = mass + y;
      comp = (t - mass) - y;
      mass = t;
    }
    ++res.conditioning_cells;
    u64 observed = 0;
    for (std::size_t c = i; c < j;) {
      std::size_t d = c;
      double cell_mass = 0.0;
      for (; d < j && rows[d].first.second == rows[c].first.second; ++d)
        cell_mass += rows[d].second;
      ++observed;
      res.max_deviation = std::max(
          res.max_deviation, std::abs(cell_mass / mass - res.uniform_target));
      c = d;
    }
    res.skipped_cells += q - observed;
    worst_budget =
        std::max(worst_budget, cond_err / (mass * law.weight_total));
    i = j;
  }
  res.budget = worst_budget;
  res.within_budget = res.max_deviation <= res.budget;
  return res;
}

// ---------------------------------------------------------------------------
// The per-scale report.

struct DecrementRow {
  unsigned m = 0;
  double h_cond = 0.0;            // H(pattern | prior residues)
  double h_cond_next = 0.0;       // H(pattern | block + prior residues)
  double information = 0.0;       // I(pattern : block | prior)
  double scaled_information = 0.0;
  double identity_residual = 0.0;
  u64 cells = 0;
};

struct DecrementReport {
  std::vector<DecrementRow> rows;
  double cumulative = 0.0;  // sum of 2^{-m} I
  double h_x1 = 0.0;        // entropy of the scale-1 pattern, for comparison
  u64 x = 0;
  double epsilon = 0.0;
  u64 seed = 0;
  u64 trials = 0;  // zero means exact enumeration
  SignSource source = SignSource::kLiouville;
};

inline DecrementReport decrement_report(const SieveTable& table,
                                        const std::vector<u64>& a_list,
                                        const std::vector<u64>& b_list,
                                        u64 dilation, u64 x, double epsilon,
                                        unsigned m_lo, unsigned m_hi,
                                        SignSource source = SignSource::kLiouville,
                                        u64 seed = 0, u64 trials = 0) {
  if (m_lo < 1 || m_hi < m_lo)
    throw std::invalid_argument("need 1 <= m_lo <= m_hi");
  const LogDistribution dist = log_distribution(x, epsilon);

  DecrementReport report;
  report.x = x;
  report.epsilon = epsilon;
  report.seed = seed;
  report.trials = trials;
  report.source = source;

  const auto build_law = [&](const DecrementContext& ctx) {
    return trials == 0
               ? sample_X_Y(ctx, dist, table, source, seed)
               : sample_X_Y_sampled(ctx, dist, table, trials, seed, source);
  };

  const std::vector<std::size_t> ax_x = {0}, ax_y = {1}, ax_prior = {2};
  double cum = 0.0;
  for (unsigned m = m_lo; m <= m_hi; ++m) {
    const auto ctx =
        make_decrement_context(table, a_list, b_list, dilation, m, x);
    const auto law = build_law(ctx);
    DecrementRow row;
    row.m = m;
    row.cells = law.dist.cell_count();
    row.h_cond = conditional_entropy(law.dist, ax_x, ax_prior);
    row.h_cond_next = conditional_entropy(law.dist, ax_x, {1, 2});
    row.information =
        conditional_mutual_information(law.dist, ax_x, ax_y, ax_prior);
    row.scaled_information =
        row.information / static_cast<double>(u64{1} << m);
    row.identity_residual =
        std::abs(row.h_cond_next - (row.h_cond - row.information));
    cum += row.scaled_information;
    report.rows.push_back(row);
  }
  report.cumulative = cum;

  const auto ctx1 = make_decrement_context(table, a_list, b_list, dilation, 1, x);
  report.h_x1 = entropy_of(build_law(ctx1).dist, ax_x);
  return report;
}

}  // namespace chowla
