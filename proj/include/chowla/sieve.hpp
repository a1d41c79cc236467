#pragma once

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "chowla/util.hpp"

namespace chowla {

// Primes in the dyadic block (2^m, 2^(m+1)].
struct PrimeDyadicRange {
  unsigned m = 0;
  u64 low = 0;   // exclusive
  u64 high = 0;  // inclusive
  std::vector<u64> primes;
};

// Completely multiplicative data for every n up to a fixed limit, one byte
// per n: bits 0-4 hold Omega(n) (count of prime factors with multiplicity,
// at most 31 below 2^32), bit 5 is the squarefree flag.  Everything else is
// derived on the fly: n is prime iff Omega(n) == 1, the Liouville sign is
// the parity bit, Mobius reads parity + squarefree.
class SieveTable {
 public:
  static constexpr u64 kMaxLimit = 0xFFFFFFFFULL;
  static constexpr u64 kSegment = u64{1} << 18;

  explicit SieveTable(u64 limit, std::function<void(double)> progress = {}) {
    if (limit < 2)
      throw std::invalid_argument("sieve limit must be at least 2, got " +
                                  std::to_string(limit));
    if (limit > kMaxLimit)
      throw std::invalid_argument(
          "sieve limit " + std::to_string(limit) +
          " exceeds the 2^32-1 bound of the one-byte-per-n layout");
    limit_ = limit;
    const auto t0 = std::chrono::steady_clock::now();
    allocate();
    build(std::move(progress));
    build_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }

  u64 limit() const { return limit_; }
  double build_seconds() const { return build_seconds_; }

  // Omega: prime factors counted with multiplicity; Omega(1) = 0.
  unsigned omega(u64 n) const { return byte(n) & 0x1F; }

  bool is_squarefree(u64 n) const { return (byte(n) & 0x20) != 0; }

  bool is_prime(u64 n) const { return (byte(n) & 0x1F) == 1; }

  // (-1)^Omega(n); +1 at n = 1.
  int liouville(u64 n) const { return 1 - 2 * static_cast<int>(byte(n) & 1); }

  // (-1)^Omega on squarefree n, 0 otherwise; +1 at n = 1.
  int mobius(u64 n) const {
    const u8 b = byte(n);
    if (!(b & 0x20)) return 0;
    return 1 - 2 * static_cast<int>(b & 1);
  }

  // log p at prime powers p^j, 0 elsewhere (natural log).
  double von_mangoldt(u64 n) const {
    const u8 b = byte(n);
    const unsigned om = b & 0x1F;
    if (om == 1) return std::log(static_cast<double>(n));
    if (om == 0 || (b & 0x20)) return 0.0;
    // Omega = j >= 2 and not squarefree: n is a prime power iff it has an
    // exact j-th root that is prime.
    const u64 r = nth_root(n, om);
    for (u64 cand = (r > 2 ? r - 1 : 2); cand <= r + 1; ++cand) {
      if (exact_pow(cand, om) == n && is_prime(cand))
        return std::log(static_cast<double>(cand));
    }
    return 0.0;
  }

  std::vector<u64> primes_in(u64 lo_excl, u64 hi_incl) const {
    if (hi_incl > limit_)
      throw std::out_of_range("prime enumeration up to " +
                              std::to_string(hi_incl) +
                              " requires sieve limit >= that, have " +
                              std::to_string(limit_));
    std::vector<u64> out;
    for (u64 n = lo_excl + 1; n <= hi_incl; ++n)
      if ((bytes_[n] & 0x1F) == 1) out.push_back(n);
    return out;
  }

  PrimeDyadicRange primes_in_dyadic(unsigned m) const {
    if (m >= 31)
      throw std::invalid_argument("dyadic block index " + std::to_string(m) +
                                  " out of supported range");
    const u64 low = u64{1} << m;
    const u64 high = u64{1} << (m + 1);
    if (high > limit_)
      throw std::out_of_range("dyadic block (" + std::to_string(low) + ", " +
                              std::to_string(high) +
                              "] requires sieve limit >= " +
                              std::to_string(high) + ", have " +
                              std::to_string(limit_));
    return PrimeDyadicRange{m, low, high, primes_in(low, high)};
  }

  // Raw byte access for inner loops that have validated their range once.
  const u8* data() const { return bytes_.data(); }
  int liouville_unchecked(u64 n) const {
    return 1 - 2 * static_cast<int>(bytes_[n] & 1);
  }

  void write_cache(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kMagic, 5);
    char hdr[8];
    for (int i = 0; i < 8; ++i)
      hdr[i] = static_cast<char>((limit_ >> (8 * i)) & 0xFF);
    out.write(hdr, 8);
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
  }

  static SieveTable read_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot open " + path.string());
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
      throw std::invalid_argument(path.string() + " is not a sieve cache file");
    char hdr[8];
    in.read(hdr, 8);
    if (!in) throw std::invalid_argument(path.string() + ": truncated header");
    u64 limit = 0;
    for (int i = 0; i < 8; ++i)
      limit |= static_cast<u64>(static_cast<u8>(hdr[i])) << (8 * i);
    if (limit < 2 || limit > kMaxLimit)
      throw std::invalid_argument(path.string() + ": implausible limit " +
                                  std::to_string(limit));
    SieveTable t(private_tag{});
    t.limit_ = limit;
    t.allocate();
    in.read(reinterpret_cast<char*>(t.bytes_.data()),
            static_cast<std::streamsize>(t.bytes_.size()));
    if (!in || static_cast<u64>(in.gcount()) != limit + 1)
      throw std::invalid_argument(path.string() + ": truncated payload");
    return t;
  }

  // Cheap content hash for report banners: FNV-1a over the limit and a
  // 64 Ki-sample of the byte array.
  u64 fingerprint() const {
    u64 h = 0xCBF29CE484222325ULL;
    auto mix = [&h](u8 v) {
      h ^= v;
      h *= 0x100000001B3ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<u8>((limit_ >> (8 * i)) & 0xFF));
    const u64 stride = std::max<u64>(1, (limit_ + 1) / 65536);
    for (u64 n = 0; n <= limit_; n += stride) mix(bytes_[n]);
    mix(bytes_[limit_]);
    return h;
  }

 private:
  struct private_tag {};
  explicit SieveTable(private_tag) {}

  static constexpr const char kMagic[6] = "CHWL1";

  u8 byte(u64 n) const {
    if (n == 0 || n > limit_)
      throw std::out_of_range("n = " + std::to_string(n) +
                              " outside sieve table range [1, " +
                              std::to_string(limit_) + "]");
    return bytes_[n];
  }

  void allocate() {
    try {
      bytes_.resize(limit_ + 1);
    } catch (const std::bad_alloc&) {
      throw resource_error("sieve table for limit " + std::to_string(limit_) +
                           " needs " + std::to_string(limit_ + 1) +
                           " bytes; allocation failed");
    }
  }

  void build(std::function<void(double)> progress) {
    bytes_[0] = 0;
    bytes_[1] = 0x20;  // Omega(1) = 0, squarefree

    // Base primes up to sqrt(limit) by a plain odd-only sieve.
    const u64 root = isqrt(limit_);
    std::vector<u8> small(root + 1, 1);
    std::vector<u32> base;
    for (u64 p = 2; p <= root; ++p) {
      if (!small[p]) continue;
      base.push_back(static_cast<u32>(p));
      for (u64 q = p * p; q <= root; q += p) small[q] = 0;
    }

    std::vector<u32> prod(kSegment);
    const u64 nseg = (limit_ - 1) / kSegment + 1;
    for (u64 seg = 0; seg < nseg; ++seg) {
      const u64 lo = std::max<u64>(2, seg * kSegment);
      const u64 hi = std::min(limit_, seg * kSegment + kSegment - 1);
      if (lo > hi) continue;
      const u64 len = hi - lo + 1;
      u8* by = bytes_.data() + lo;
      std::memset(by, 0x20, len);
      std::fill(prod.begin(), prod.begin() + len, 1u);

      for (u32 q : base) {
        // e = 1: every multiple of q gains one factor.
        u64 start = std::max<u64>(q, ((lo + q - 1) / q) * q);
        for (u64 i = start - lo; i < len; i += q) {
          prod[i] *= q;
          ++by[i];
        }
        // e >= 2: multiples of q^e gain one more factor each; the first such
        // pass also clears the squarefree bit.
        for (u64 qe = static_cast<u64>(q) * q; qe <= hi; qe *= q) {
          start = std::max<u64>(qe, ((lo + qe - 1) / qe) * qe);
          for (u64 i = start - lo; i < len; i += qe) {
            prod[i] *= q;
            ++by[i];
            by[i] &= 0xDF;
          }
        }
      }
      // Whatever the small primes did not account for is a single prime
      // factor above sqrt(limit).
      for (u64 i = 0; i < len; ++i)
        if (prod[i] != static_cast<u32>(lo + i)) ++by[i];
      if (progress && (seg % 64 == 0 || seg + 1 == nseg))
        progress(static_cast<double>(seg + 1) / static_cast<double>(nseg));
    }
  }

  static u64 nth_root(u64 n, unsigned j) {
    const double r = std::pow(static_cast<double>(n), 1.0 / j);
    return static_cast<u64>(std::llround(r));
  }

  // base^j if it equals a value <= 2^32-ish without overflow, else 0.
  static u64 exact_pow(u64 base, unsigned j) {
    u64 r = 1;
    for (unsigned i = 0; i < j; ++i) {
      if (base != 0 && r > kMaxLimit / base) return 0;
      r *= base;
    }
    return r;
  }

  u64 limit_ = 0;
  double build_seconds_ = 0.0;
  std::vector<u8> bytes_;
};

inline SieveTable build_sieve(u64 limit,
                              std::function<void(double)> progress = {}) {
  return SieveTable(limit, std::move(progress));
}

// Product of all primes <= w.  Throws std::overflow_error past 2^64.
inline u64 primorial(unsigned w) {
  u64 r = 1;
  for (u64 p = 2; p <= w; ++p) {
    bool prime = p >= 2;
    for (u64 d = 2; d * d <= p; ++d)
      if (p % d == 0) {
        prime = false;
        break;
      }
    if (prime) r = checked_mul(r, p);
  }
  return r;
}

// Trial-division primality for small standalone checks (no table needed).
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Euler phi by trial division; meant for moduli, not bulk use.
inline u64 totient(u64 n) {
  if (n == 0) throw std::invalid_argument("totient(0) undefined");
  u64 result = n, m = n;
  for (u64 d = 2; d * d <= m; ++d) {
    if (m % d == 0) {
      result -= result / d;
      while (m % d == 0) m /= d;
    }
  }
  if (m > 1) result -= result / m;
  return result;
}

}  // namespace chowla
