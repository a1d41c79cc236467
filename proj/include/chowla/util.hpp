#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <charconv>
#include <future>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chowla {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// Thrown when a computation would exceed available memory; the message states
// the estimated requirement so callers can retry with smaller parameters.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an average is requested over a range containing no terms.
class empty_range_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline u64 checked_mul(u64 a, u64 b) {
  u64 r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("u64 product overflow: " + std::to_string(a) +
                              " * " + std::to_string(b));
  return r;
}

inline u64 isqrt(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline u64 ipow_checked(u64 base, unsigned exp) {
  u64 r = 1;
  for (unsigned i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

// Shortest decimal that round-trips to the same double.  All report output
// goes through here so files are byte-identical across runs.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Deterministic summation.
//
// Terms are grouped into fixed 4096-wide blocks by index.  Each block is
// summed with Kahan compensation; block totals are then merged with a
// pairwise tree whose shape depends only on the number of blocks.  The result
// is therefore a pure function of the term sequence: scheduling the blocks
// across threads cannot change a single bit.

inline constexpr u64 kSumBlock = 4096;

class PairwiseStack {
 public:
  void push(double v) { push_at(v, 0); }

  // Push a value that already aggregates 2^lvl consecutive blocks.  Only
  // legal when count() is a multiple of 2^lvl, i.e. on an aligned boundary.
  void push_at(double v, int lvl) {
    u64 m = count_ >> lvl;
    count_ += (u64{1} << lvl);
    while (m & 1) {
      v += levels_[static_cast<std::size_t>(lvl)];
      m >>= 1;
      ++lvl;
    }
    levels_[static_cast<std::size_t>(lvl)] = v;
  }

  double total() const {
    double s = 0.0;
    u64 m = count_;
    for (int lvl = 0; m != 0; ++lvl, m >>= 1)
      if (m & 1) s += levels_[static_cast<std::size_t>(lvl)];
    return s;
  }

  u64 count() const { return count_; }

 private:
  std::array<double, 64> levels_{};
  u64 count_ = 0;
};

// Same reduction for vector-valued blocks (one slot per output series).
class PairwiseStackVec {
 public:
  explicit PairwiseStackVec(std::size_t width) : width_(width) {}

  void push_at(std::vector<double>&& v, int lvl) {
    u64 m = count_ >> lvl;
    count_ += (u64{1} << lvl);
    while (m & 1) {
      auto& l = levels_[static_cast<std::size_t>(lvl)];
      for (std::size_t i = 0; i < width_; ++i) v[i] += l[i];
      m >>= 1;
      ++lvl;
    }
    if (levels_.size() <= static_cast<std::size_t>(lvl))
      levels_.resize(static_cast<std::size_t>(lvl) + 1);
    levels_[static_cast<std::size_t>(lvl)] = std::move(v);
  }

  std::vector<double> total() const {
    std::vector<double> s(width_, 0.0);
    u64 m = count_;
    for (int lvl = 0; m != 0; ++lvl, m >>= 1)
      if (m & 1) {
        auto& l = levels_[static_cast<std::size_t>(lvl)];
        for (std::size_t i = 0; i < width_; ++i) s[i] += l[i];
      }
    return s;
  }

 private:
  std::size_t width_;
  std::vector<std::vector<double>> levels_;
  u64 count_ = 0;
};

namespace detail {

inline int chunk_level(u64 nblocks, unsigned threads) {
  if (threads <= 1) return 0;
  int lvl = 0;
  // Aim for ~4 chunks per thread so stragglers even out.
  while ((nblocks >> (lvl + 1)) >= 4 * static_cast<u64>(threads)) ++lvl;
  return lvl;
}

}  // namespace detail

// Sum f(n) over integer n in (lo_excl, hi_incl].
template <class TermFn>
double sum_over_range(u64 lo_excl, u64 hi_incl, TermFn&& f, unsigned threads = 1) {
  if (hi_incl <= lo_excl) return 0.0;
  const u64 count = hi_incl - lo_excl;
  const u64 nblocks = (count + kSumBlock - 1) / kSumBlock;

  auto block_value = [&](u64 j) {
    const u64 b0 = lo_excl + 1 + j * kSumBlock;
    const u64 b1 = std::min(hi_incl, b0 + kSumBlock - 1);
    double s = 0.0, c = 0.0;
    for (u64 n = b0; n <= b1; ++n) {
      double y = f(n) - c;
      double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s;
  };

  PairwiseStack stack;
  const int lvl = detail::chunk_level(nblocks, threads);
  if (lvl == 0) {
    for (u64 j = 0; j < nblocks; ++j) stack.push(block_value(j));
    return stack.total();
  }

  const u64 chunk = u64{1} << lvl;
  const u64 nchunks = nblocks / chunk;
  std::vector<double> partial(nchunks);
  std::vector<std::future<void>> jobs;
  const u64 per = (nchunks + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const u64 c0 = t * per, c1 = std::min(nchunks, c0 + per);
    if (c0 >= c1) break;
    jobs.push_back(std::async(std::launch::async, [&, c0, c1] {
      for (u64 c = c0; c < c1; ++c) {
        PairwiseStack local;
        for (u64 j = c * chunk; j < (c + 1) * chunk; ++j)
          local.push(block_value(j));
        partial[c] = local.total();
      }
    }));
  }
  for (auto& j : jobs) j.get();
  for (u64 c = 0; c < nchunks; ++c) stack.push_at(partial[c], lvl);
  for (u64 j = nchunks * chunk; j < nblocks; ++j) stack.push(block_value(j));
  return stack.total();
}

// Batched variant: fill(n, out) writes one term per output series.  Produces
// exactly the numbers sum_over_range would give for each series alone,
// provided fill is the same function restricted to that slot.
template <class FillFn>
std::vector<double> sum_over_range_multi(u64 lo_excl, u64 hi_incl, std::size_t width,
                                         FillFn&& fill, unsigned threads = 1) {
  if (hi_incl <= lo_excl || width == 0) return std::vector<double>(width, 0.0);
  const u64 count = hi_incl - lo_excl;
  const u64 nblocks = (count + kSumBlock - 1) / kSumBlock;

  auto block_value = [&](u64 j, std::vector<double>& term) {
    const u64 b0 = lo_excl + 1 + j * kSumBlock;
    const u64 b1 = std::min(hi_incl, b0 + kSumBlock - 1);
    std::vector<double> s(width, 0.0), c(width, 0.0);
    for (u64 n = b0; n <= b1; ++n) {
      std::fill(term.begin(), term.end(), 0.0);
      fill(n, std::span<double>(term));
      for (std::size_t i = 0; i < width; ++i) {
        double y = term[i] - c[i];
        double t = s[i] + y;
        c[i] = (t - s[i]) - y;
        s[i] = t;
      }
    }
    return s;
  };

  PairwiseStackVec stack(width);
  const int lvl = detail::chunk_level(nblocks, threads);
  if (lvl == 0) {
    std::vector<double> term(width);
    for (u64 j = 0; j < nblocks; ++j) stack.push_at(block_value(j, term), 0);
    return stack.total();
  }

  const u64 chunk = u64{1} << lvl;
  const u64 nchunks = nblocks / chunk;
  std::vector<std::vector<double>> partial(nchunks);
  std::vector<std::future<void>> jobs;
  const u64 per = (nchunks + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const u64 c0 = t * per, c1 = std::min(nchunks, c0 + per);
    if (c0 >= c1) break;
    jobs.push_back(std::async(std::launch::async, [&, c0, c1] {
      std::vector<double> term(width);
      for (u64 c = c0; c < c1; ++c) {
        PairwiseStackVec local(width);
        for (u64 j = c * chunk; j < (c + 1) * chunk; ++j)
          local.push_at(block_value(j, term), 0);
        partial[c] = local.total();
      }
    }));
  }
  for (auto& j : jobs) j.get();
  for (u64 c = 0; c < nchunks; ++c) stack.push_at(std::move(partial[c]), lvl);
  std::vector<double> term(width);
  for (u64 j = nchunks * chunk; j < nblocks; ++j) stack.push_at(block_value(j, term), 0);
  return stack.total();
}

// ---------------------------------------------------------------------------
// Counter-based generator: value i of a stream is a pure function of
// (seed, i), so any draw can be recomputed in isolation and runs are
// reproducible from the seed alone.  splitmix64 finalizer.

class CounterRng {
 public:
  explicit CounterRng(u64 seed) : seed_(seed) {}

  u64 at(u64 counter) const {
    u64 z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01(u64 counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, bound).  Plain modulo: for bound < 2^32 the bias is below
  // 2^-32, far under anything the statistical checks here can resolve.
  u64 below(u64 counter, u64 bound) const { return at(counter) % bound; }

  u64 seed() const { return seed_; }

 private:
  u64 seed_;
};

}  // namespace chowla
