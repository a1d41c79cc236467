#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "chowla/log_average.hpp"
#include "chowla/sieve.hpp"
#include "chowla/util.hpp"

namespace chowla {

enum class CorrelationMode { kLiouville, kMobiusPower };

// Logarithmic average over n of a product of multiplicative-function values
// at the shifted arguments a_j * n + dilation * b_j.
//
// The dilation multiplies every shift, so scaling it by a prime p compares
// the same pattern at argument tuples (a_j n + a p b_j), which is the
// substitution n -> p n away from the undilated tuple.
struct CorrelationSpec {
  std::vector<u64> a_list;
  std::vector<i64> b_list;
  u64 dilation = 1;
  u64 x = 0;
  double epsilon = 0.0;
  bool use_lower_cutoff = false;  // average over (x^epsilon, x] instead of (0, x]
  CorrelationMode mode = CorrelationMode::kLiouville;
  std::vector<unsigned> exponents;  // per-factor powers, kMobiusPower only

  unsigned k() const { return static_cast<unsigned>(a_list.size()); }

  u64 lower_cutoff() const {
    if (!use_lower_cutoff) return 0;
    double c = std::pow(static_cast<double>(x), epsilon);
    if (!(c >= 0.0)) throw std::invalid_argument("bad lower cutoff exponent");
    return static_cast<u64>(c);
  }

  // Per-factor additive shift, dilation folded in.
  i64 shift(unsigned j) const {
    i64 s;
    if (__builtin_mul_overflow(static_cast<i64>(dilation), b_list[j], &s))
      throw std::overflow_error("dilation * b overflows");
    return s;
  }

  // Largest sieve index the average will read.
  u64 required_limit() const {
    u64 req = 0;
    for (unsigned j = 0; j < k(); ++j) {
      const u128 ax = static_cast<u128>(a_list[j]) * x;
      const i64 sh = shift(j);
      u128 arg = sh >= 0 ? ax + static_cast<u64>(sh)
                         : ax - std::min(ax, static_cast<u128>(-sh));
      if (arg > std::numeric_limits<u64>::max())
        throw std::overflow_error("correlation argument exceeds u64");
      req = std::max(req, static_cast<u64>(arg));
    }
    return req;
  }

  void validate() const {
    if (a_list.empty())
      throw std::invalid_argument("correlation needs at least one factor");
    if (b_list.size() != a_list.size())
      throw std::invalid_argument("a_list and b_list sizes differ");
    if (mode == CorrelationMode::kMobiusPower &&
        exponents.size() != a_list.size())
      throw std::invalid_argument("mobius mode needs one exponent per factor");
    if (mode == CorrelationMode::kMobiusPower)
      for (unsigned e : exponents)
        if (e == 0)
          throw std::invalid_argument("mobius exponents must be positive");
    if (dilation == 0) throw std::invalid_argument("dilation must be positive");
    if (x < 2) throw std::invalid_argument("x must be at least 2");
    for (u64 a : a_list)
      if (a == 0) throw std::invalid_argument("multipliers must be positive");
    if (use_lower_cutoff && !(epsilon > 0.0 && epsilon < 1.0))
      throw std::invalid_argument("cutoff exponent must lie in (0,1)");
    const u64 cut = lower_cutoff();
    if (cut >= x)
      throw empty_range_error("cutoff " + std::to_string(cut) +
                              " leaves no terms below x = " + std::to_string(x));
    for (unsigned j = 0; j < k(); ++j) {
      const u128 first = static_cast<u128>(a_list[j]) * (cut + 1);
      const i64 sh = shift(j);
      if (sh < 0 && first < static_cast<u128>(-sh) + 1)
        throw std::invalid_argument(
            "factor " + std::to_string(j) +
            " evaluates below 1 at the start of the range");
    }
  }
};

namespace detail {

struct CompiledFactor {
  u64 a;
  i64 shift;
  unsigned exponent;  // 1 in Liouville mode
};

struct CompiledSpec {
  std::vector<CompiledFactor> factors;
  bool mobius;
};

inline CompiledSpec compile(const CorrelationSpec& s) {
  CompiledSpec c;
  c.mobius = s.mode == CorrelationMode::kMobiusPower;
  for (unsigned j = 0; j < s.k(); ++j)
    c.factors.push_back(
        {s.a_list[j], s.shift(j), c.mobius ? s.exponents[j] : 1u});
  return c;
}

}  // namespace detail

// Evaluate several correlation averages in one pass over n.  All specs must
// share the same averaging range; each factor product is accumulated into
// its own slot with the identical block/merge arithmetic the single-spec
// overload uses, so results match that overload bit for bit.
inline std::vector<LogAverage> log_correlation_batch(
    const SieveTable& table, const std::vector<CorrelationSpec>& specs,
    unsigned threads = 1) {
  if (specs.empty()) return {};
  for (const auto& s : specs) s.validate();
  const u64 x = specs[0].x;
  const u64 cut = specs[0].lower_cutoff();
  u64 required = 0;
  for (const auto& s : specs) {
    if (s.x != x || s.lower_cutoff() != cut)
      throw std::invalid_argument(
          "batched correlations must share one averaging range");
    required = std::max(required, s.required_limit());
  }
  if (required > table.limit())
    throw std::out_of_range("correlation needs sieve limit >= " +
                            std::to_string(required) + ", have " +
                            std::to_string(table.limit()));

  // One flat factor array keeps the inner loop free of pointer chasing even
  // when thousands of specs are batched.
  struct FlatFactor {
    u64 a;
    i64 shift;
    u8 odd_exponent;
  };
  std::vector<FlatFactor> flat;
  std::vector<u32> start(specs.size() + 1, 0);
  std::vector<u8> is_mobius(specs.size(), 0);
  for (std::size_t d = 0; d < specs.size(); ++d) {
    const auto c = detail::compile(specs[d]);
    is_mobius[d] = c.mobius ? 1 : 0;
    for (const auto& fac : c.factors)
      flat.push_back({fac.a, fac.shift, static_cast<u8>(fac.exponent & 1)});
    start[d + 1] = static_cast<u32>(flat.size());
  }

  const u8* bytes = table.data();
  const FlatFactor* ff = flat.data();
  auto fill = [&](u64 n, std::span<double> out) {
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t d = 0; d < specs.size(); ++d) {
      int sign = 1;
      if (is_mobius[d]) {
        for (u32 i = start[d]; i < start[d + 1]; ++i) {
          const u64 arg =
              static_cast<u64>(static_cast<i64>(ff[i].a * n) + ff[i].shift);
          const u8 b = bytes[arg];
          if (!(b & 0x20)) {
            sign = 0;
            break;
          }
          if (ff[i].odd_exponent) sign *= 1 - 2 * static_cast<int>(b & 1);
        }
      } else {
        for (u32 i = start[d]; i < start[d + 1]; ++i) {
          const u64 arg =
              static_cast<u64>(static_cast<i64>(ff[i].a * n) + ff[i].shift);
          sign *= 1 - 2 * static_cast<int>(bytes[arg] & 1);
        }
      }
      out[d] = sign * inv;
    }
  };

  const auto nums =
      sum_over_range_multi(cut, x, specs.size(), fill, threads);
  const double den = sum_over_range(
      cut, x, [](u64 n) { return 1.0 / static_cast<double>(n); }, threads);

  std::vector<LogAverage> out(specs.size());
  for (std::size_t d = 0; d < specs.size(); ++d) {
    out[d].numerator = nums[d];
    out[d].normalizer = den;
    out[d].term_count = x - cut;
    out[d].value = std::clamp(nums[d] / den, -1.0, 1.0);
  }
  return out;
}

inline LogAverage log_correlation(const SieveTable& table,
                                  const CorrelationSpec& spec,
                                  unsigned threads = 1) {
  return log_correlation_batch(table, {spec}, threads)[0];
}

}  // namespace chowla
