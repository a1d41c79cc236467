#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "chowla/sieve.hpp"
#include "chowla/util.hpp"

namespace chowla {

using cdouble = std::complex<double>;

// Function on Z/NZ (or on [1,N] before zero-extension in interval mode).
struct CyclicSignal {
  std::vector<cdouble> values;

  CyclicSignal() = default;
  explicit CyclicSignal(std::vector<cdouble> v) : values(std::move(v)) {}
  explicit CyclicSignal(const std::vector<double>& v) {
    values.reserve(v.size());
    for (double x : v) values.emplace_back(x, 0.0);
  }

  std::size_t size() const { return values.size(); }

  void require_finite() const {
    if (values.empty())
      throw std::invalid_argument("signal must have at least one value");
    for (const auto& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("signal contains a nonfinite value");
  }
};

namespace detail {

inline void fft_pow2(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const cdouble wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w = 1.0;
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cdouble u = a[i + j];
        const cdouble v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// DFT of a fixed size.  Power-of-two sizes run the radix-2 kernel directly;
// other sizes go through the chirp factorization n k = (n^2 + k^2
// - (k-n)^2) / 2, which turns the transform into one circular convolution at
// a power-of-two length.  The chirp spectrum is computed once per plan, so
// repeated transforms of the same size pay two FFTs each.
class DftPlan {
 public:
  explicit DftPlan(std::size_t n) : n_(n) {
    if ((n_ & (n_ - 1)) == 0) return;
    m_ = 1;
    while (m_ < 2 * n_ - 1) m_ <<= 1;
    chirp_.resize(n_);
    bhat_.assign(m_, 0.0);
    // square exponents reduced mod 2n keep the angle arguments small
    const u64 period = 2 * static_cast<u64>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const u64 sq = (static_cast<u64>(i) * static_cast<u64>(i)) % period;
      const double ang =
          -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n_);
      chirp_[i] = cdouble(std::cos(ang), std::sin(ang));
      bhat_[i] = std::conj(chirp_[i]);
      if (i != 0) bhat_[m_ - i] = bhat_[i];
    }
    fft_pow2(bhat_, false);
  }

  std::size_t size() const { return n_; }

  void run(const cdouble* x, std::vector<cdouble>& out,
           std::vector<cdouble>& work) const {
    if ((n_ & (n_ - 1)) == 0) {
      out.assign(x, x + n_);
      fft_pow2(out, false);
      return;
    }
    work.assign(m_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) work[i] = x[i] * chirp_[i];
    fft_pow2(work, false);
    for (std::size_t i = 0; i < m_; ++i) work[i] *= bhat_[i];
    fft_pow2(work, true);
    const double scale = 1.0 / static_cast<double>(m_);
    out.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = work[i] * scale * chirp_[i];
  }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<cdouble> chirp_;
  std::vector<cdouble> bhat_;
};

// One reusable plan plus buffers for the Fourier form of the fourth box
// power: sum over frequencies of |E_x f(x) e(-x xi / N)|^4.
struct SpectralU2 {
  DftPlan plan;
  std::vector<cdouble> hat, work;

  explicit SpectralU2(std::size_t n) : plan(n) {}

  double fourth_power(const cdouble* f, std::size_t n) {
    plan.run(f, hat, work);
    double acc = 0.0;
    const double scale = 1.0 / static_cast<double>(n);
    for (const auto& z : hat) {
      const double m2 = std::norm(z * scale);
      acc += m2 * m2;
    }
    return acc;
  }
};

// E_h of the recursive box power of the multiplicative derivative
// g_h(n) = f(n+h) conj(f(n)); base case is |E f|^2.  h runs in ascending
// order so the reduction is deterministic.  Memory is O(kN) via one scratch
// row per level.  When a spectral helper is supplied, levels that bottom out
// at k = 2 use it, cutting the time from O(N^k) to O(N^{k-1} log N); the
// helper is only ever wired in for depth >= 3 so that the top-level k <= 2
// entry points stay independent of the Fourier kernel they are checked
// against.
inline double u_pow(std::vector<std::vector<cdouble>>& scratch, const cdouble* f,
                    std::size_t n, unsigned k, SpectralU2* spectral = nullptr) {
  if (k == 1) {
    cdouble s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f[i];
    s /= static_cast<double>(n);
    return std::norm(s);
  }
  if (k == 2 && spectral != nullptr) return spectral->fourth_power(f, n);
  auto& g = scratch[k - 2];
  g.resize(n);
  double acc = 0.0, comp = 0.0;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t i = 0; i + h < n; ++i) g[i] = f[i + h] * std::conj(f[i]);
    for (std::size_t i = n - h; i < n; ++i) g[i] = f[i + h - n] * std::conj(f[i]);
    const double v = u_pow(scratch, g.data(), n, k - 1, spectral);
    const double y = v - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc / static_cast<double>(n);
}

inline double root_pow2k(double base, unsigned k) {
  if (base < 0.0) {
    if (base < -1e-12)
      throw std::runtime_error("Gowers box power " + format_double(base) +
                               " is negative beyond the cancellation guard");
    base = 0.0;
  }
  return std::pow(base, 1.0 / static_cast<double>(u64{1} << k));
}

}  // namespace detail

// 2^k-th root of the averaged box product over Z/NZ.
inline double gowers_norm_cyclic(const CyclicSignal& f, unsigned k) {
  if (k == 0) throw std::invalid_argument("Gowers norm order must be >= 1");
  f.require_finite();
  std::vector<std::vector<cdouble>> scratch(k >= 2 ? k - 1 : 0);
  double base;
  if (k >= 3) {
    detail::SpectralU2 spectral(f.size());
    base = detail::u_pow(scratch, f.values.data(), f.size(), k, &spectral);
  } else {
    base = detail::u_pow(scratch, f.values.data(), f.size(), k);
  }
  return detail::root_pow2k(base, k);
}

// Interval norm: zero-extend [1,N] into Z/N'Z and divide by the norm of the
// window indicator.  Any N' >= 2N+1 gives the same value because no cube
// pattern can wrap; the default follows the 3N convention.
inline double gowers_norm_interval(const CyclicSignal& f, unsigned k,
                                   std::size_t n_prime = 0) {
  if (k == 0) throw std::invalid_argument("Gowers norm order must be >= 1");
  f.require_finite();
  const std::size_t n = f.size();
  if (n_prime == 0) n_prime = 3 * n;
  if (n_prime < 2 * n + 1)
    throw std::invalid_argument("embedding modulus must be at least 2N+1");
  CyclicSignal padded, window;
  padded.values.assign(n_prime, 0.0);
  window.values.assign(n_prime, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    padded.values[i + 1] = f.values[i];
    window.values[i + 1] = 1.0;
  }
  const double num = gowers_norm_cyclic(padded, k);
  const double den = gowers_norm_cyclic(window, k);
  return num / den;
}

// ---------------------------------------------------------------------------
// U^2 through the Fourier side: the fourth power equals the sum of |fhat|^4.

namespace detail {

// sum over frequencies of |fhat|^4 with fhat(xi) = E_x f(x) e(-x xi / N)
inline double u2_fourth_power(const CyclicSignal& f) {
  SpectralU2 spectral(f.size());
  return spectral.fourth_power(f.values.data(), f.size());
}

}  // namespace detail

inline double gowers_u2_fft(const CyclicSignal& f) {
  f.require_finite();
  return std::pow(detail::u2_fourth_power(f), 0.25);
}

// Interval U^2 via the Fourier identity at a power-of-two embedding modulus;
// used by the scans where the O(N'^2) recursion would be prohibitive.
inline double gowers_u2_interval_fast(const CyclicSignal& f) {
  f.require_finite();
  const std::size_t n = f.size();
  std::size_t np = 1;
  while (np < 2 * n + 1) np <<= 1;
  CyclicSignal padded, window;
  padded.values.assign(np, 0.0);
  window.values.assign(np, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    padded.values[i + 1] = f.values[i];
    window.values[i + 1] = 1.0;
  }
  const double num = detail::u2_fourth_power(padded);
  const double den = detail::u2_fourth_power(window);
  return std::pow(num / den, 0.25);
}

// ---------------------------------------------------------------------------
// W-tricked von Mangoldt.

inline double w_tricked_von_mangoldt(const SieveTable& table, u64 b, u64 W,
                                     u64 n) {
  if (W == 0 || b < 1 || b > W)
    throw std::invalid_argument("need 1 <= b <= W");
  if (std::gcd(b, W) != 1)
    throw std::invalid_argument("b = " + std::to_string(b) +
                                " shares a factor with W = " +
                                std::to_string(W));
  const u64 arg = checked_mul(W, n) + b;
  if (arg > table.limit())
    throw std::out_of_range("W-tricked value at " + std::to_string(arg) +
                            " requires sieve limit >= that, have " +
                            std::to_string(table.limit()));
  const double ratio = static_cast<double>(totient(W)) / static_cast<double>(W);
  return ratio * table.von_mangoldt(arg);
}

struct UniformityRow {
  unsigned w = 0;
  u64 b = 0;
  unsigned norm_order = 0;
  u64 n = 0;
  double norm = 0.0;
};

// Interval Gowers norm of the recentred W-tricked von Mangoldt function for
// every reduced residue b, for each w in the list.  norm_order 2 runs on the
// Fourier fast path; higher orders fall back to the recursion and are only
// sensible for small N.
inline std::vector<UniformityRow> uniformity_scan(
    const SieveTable& table, const std::vector<unsigned>& w_list,
    unsigned norm_order, u64 n) {
  if (norm_order < 1) throw std::invalid_argument("norm order must be >= 1");
  if (n < 1) throw std::invalid_argument("need N >= 1");
  std::vector<UniformityRow> rows;
  for (unsigned w : w_list) {
    const u64 W = primorial(w);
    if (checked_mul(W, n) + W > table.limit())
      throw std::out_of_range("scan at w = " + std::to_string(w) +
                              " requires sieve limit >= " +
                              std::to_string(W * n + W) + ", have " +
                              std::to_string(table.limit()));
    const double ratio =
        static_cast<double>(totient(W)) / static_cast<double>(W);
    for (u64 b = 1; b <= W; ++b) {
      if (std::gcd(b, W) != 1) continue;
      CyclicSignal f;
      f.values.reserve(n);
      for (u64 i = 1; i <= n; ++i)
        f.values.emplace_back(ratio * table.von_mangoldt(W * i + b) - 1.0, 0.0);
      const double norm = norm_order == 2
                              ? gowers_u2_interval_fast(f)
                              : gowers_norm_interval(f, norm_order);
      rows.push_back({w, b, norm_order, n, norm});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Generalized von Neumann ratio.

// Lookup table for a bounded function on a contiguous integer range.
struct BoundedTable {
  i64 base = 0;  // value at argument v lives at values[v - base]
  std::vector<cdouble> values;

  cdouble at(i64 v) const { return values[static_cast<std::size_t>(v - base)]; }
  bool covers(i64 lo, i64 hi) const {
    return lo >= base && hi < base + static_cast<i64>(values.size());
  }
};

struct VonNeumannInstance {
  u64 n_range = 0;  // n runs over [1, N]
  u64 w_factor = 1; // W; d runs over [1, N/W]
  std::vector<cdouble> theta;    // indexed by d - 1
  std::vector<BoundedTable> phis;
  std::vector<i64> a, b, r;      // phi_j argument is a_j n + W b_j d + r_j

  u64 d_range() const { return n_range / w_factor; }

  void validate() const {
    if (n_range < 1) throw std::invalid_argument("need N >= 1");
    if (w_factor < 1 ||
        static_cast<double>(w_factor) >
            std::pow(static_cast<double>(n_range), 0.1) + 1e-9)
      throw std::invalid_argument("W must satisfy 1 <= W <= N^0.1");
    if (d_range() < 1) throw std::invalid_argument("empty d range");
    if (theta.size() != d_range())
      throw std::invalid_argument("theta must have one value per d in [1, N/W]");
    const std::size_t k = phis.size();
    if (a.size() != k || b.size() != k || r.size() != k)
      throw std::invalid_argument("coefficient arrays must match phi count");
    for (const auto& z : theta)
      if (!(std::abs(z) <= 1.0 + 1e-9))
        throw std::invalid_argument("theta exceeds the unit bound");
    for (std::size_t j = 0; j < k; ++j) {
      for (const auto& z : phis[j].values)
        if (!(std::abs(z) <= 1.0 + 1e-9))
          throw std::invalid_argument("phi exceeds the unit bound");
      // argument range over the (n, d) grid is monotone in each variable
      const i64 Wb = static_cast<i64>(w_factor) * b[j];
      i64 lo = r[j], hi = r[j];
      auto stretch = [&](i64 coeff, i64 vmax) {
        if (coeff >= 0)
          hi += coeff * vmax, lo += coeff;
        else
          lo += coeff * vmax, hi += coeff;
      };
      stretch(a[j], static_cast<i64>(n_range));
      stretch(Wb, static_cast<i64>(d_range()));
      if (!phis[j].covers(lo, hi))
        throw std::invalid_argument(
            "phi table " + std::to_string(j) + " does not cover arguments [" +
            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
};

struct VonNeumannResult {
  double lhs = 0.0;
  double norm = 0.0;
  double ratio = 0.0;
};

// Measures the multilinear average against the interval norm of theta.  The
// bounding constant is unknowable from the statement, so only the ratio is
// reported; nothing is asserted here.
inline VonNeumannResult von_neumann_ratio(const VonNeumannInstance& inst,
                                          unsigned k) {
  inst.validate();
  if (k == 0) throw std::invalid_argument("norm order must be >= 1");
  const u64 D = inst.d_range();
  cdouble acc = 0.0;
  for (u64 d = 1; d <= D; ++d) {
    cdouble inner = 0.0;
    for (u64 n = 1; n <= inst.n_range; ++n) {
      cdouble prod = 1.0;
      for (std::size_t j = 0; j < inst.phis.size(); ++j) {
        const i64 arg = inst.a[j] * static_cast<i64>(n) +
                        static_cast<i64>(inst.w_factor) * inst.b[j] *
                            static_cast<i64>(d) +
                        inst.r[j];
        prod *= inst.phis[j].at(arg);
      }
      inner += prod;
    }
    acc += inst.theta[d - 1] * inner;
  }
  VonNeumannResult res;
  res.lhs = std::abs(acc) /
            (static_cast<double>(D) * static_cast<double>(inst.n_range));
  res.norm = gowers_norm_interval(CyclicSignal(inst.theta), k);
  if (res.norm > 0.0)
    res.ratio = res.lhs / res.norm;
  else
    res.ratio = res.lhs == 0.0 ? 0.0
                               : std::numeric_limits<double>::infinity();
  return res;
}

// ---------------------------------------------------------------------------
// Gowers-Cauchy-Schwarz.

struct LinearForm {
  std::vector<i64> coeffs;  // length k; entry i is the d_i coefficient
};

struct GcsResult {
  double lhs = 0.0;
  double norm = 0.0;
  bool passed = false;
};

// |E_{d in (Z/N)^k} theta(d_1 + ... + d_k) prod_i phi_i(L_i(d))| is at most
// the U^k norm of theta whenever form i ignores coordinate i and every phi
// is 1-bounded.  Checked by direct grid evaluation.
inline GcsResult gcs_check(const CyclicSignal& theta,
                           const std::vector<CyclicSignal>& phis,
                           const std::vector<LinearForm>& forms,
                           double slack = 1e-12) {
  theta.require_finite();
  const std::size_t N = theta.size();
  const std::size_t k = phis.size();
  if (k == 0 || forms.size() != k)
    throw std::invalid_argument("need one form per phi, at least one of each");
  if (k > 6) throw std::invalid_argument("grid evaluation capped at k = 6");
  for (const auto& z : theta.values)
    if (!(std::abs(z) <= 1.0 + 1e-9))
      throw std::invalid_argument("theta exceeds the unit bound");
  for (std::size_t i = 0; i < k; ++i) {
    phis[i].require_finite();
    if (phis[i].size() != N)
      throw std::invalid_argument("phi " + std::to_string(i) +
                                  " must live on the same Z/N");
    for (const auto& z : phis[i].values)
      if (!(std::abs(z) <= 1.0 + 1e-9))
        throw std::invalid_argument("phi exceeds the unit bound");
    if (forms[i].coeffs.size() != k)
      throw std::invalid_argument("form " + std::to_string(i) +
                                  " must have k coefficients");
    if (forms[i].coeffs[i] != 0)
      throw std::invalid_argument("form " + std::to_string(i) +
                                  " must not depend on its own coordinate");
  }

  std::vector<std::size_t> d(k, 0);
  cdouble acc = 0.0;
  double cells = 0.0;
  while (true) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < k; ++i) s += d[i];
    cdouble prod = theta.values[s % N];
    for (std::size_t i = 0; i < k; ++i) {
      i64 arg = 0;
      for (std::size_t t = 0; t < k; ++t)
        arg += forms[i].coeffs[t] * static_cast<i64>(d[t]);
      arg %= static_cast<i64>(N);
      if (arg < 0) arg += static_cast<i64>(N);
      prod *= phis[i].values[static_cast<std::size_t>(arg)];
    }
    acc += prod;
    cells += 1.0;
    std::size_t j = 0;
    for (; j < k; ++j) {
      if (++d[j] < N) break;
      d[j] = 0;
    }
    if (j == k) break;
  }

  GcsResult res;
  res.lhs = std::abs(acc) / cells;
  res.norm = gowers_norm_cyclic(theta, static_cast<unsigned>(k));
  res.passed = res.lhs <= res.norm + slack;
  return res;
}

}  // namespace chowla
