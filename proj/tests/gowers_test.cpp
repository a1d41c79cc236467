#include "chowla/gowers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "chowla/sieve.hpp"
#include "oracles.hpp"

namespace {

using chowla::CyclicSignal;
using chowla::cdouble;

CyclicSignal random_pm1(chowla::u64 seed, std::size_t n) {
  chowla::CounterRng rng(seed);
  std::vector<cdouble> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = rng.at(i) & 1 ? 1.0 : -1.0;
  return CyclicSignal(std::move(v));
}

CyclicSignal random_disc(chowla::u64 seed, std::size_t n) {
  chowla::CounterRng rng(seed);
  std::vector<cdouble> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(rng.uniform01(2 * i));
    const double ang = 2.0 * std::numbers::pi * rng.uniform01(2 * i + 1);
    v[i] = cdouble(r * std::cos(ang), r * std::sin(ang));
  }
  return CyclicSignal(std::move(v));
}

CyclicSignal random_phase(chowla::u64 seed, std::size_t n) {
  chowla::CounterRng rng(seed);
  std::vector<cdouble> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ang = 2.0 * std::numbers::pi * rng.uniform01(i);
    v[i] = cdouble(std::cos(ang), std::sin(ang));
  }
  return CyclicSignal(std::move(v));
}

double oracle_norm(const CyclicSignal& f, unsigned k) {
  const double p = oracle::gowers_pow_nested(f.values, k);
  return std::pow(std::max(p, 0.0), 1.0 / std::pow(2.0, k));
}

TEST(GowersCyclic, ConstantIsOne) {
  for (std::size_t n : {1u, 5u, 16u}) {
    CyclicSignal f(std::vector<cdouble>(n, 1.0));
    for (unsigned k = 1; k <= 3; ++k)
      EXPECT_DOUBLE_EQ(chowla::gowers_norm_cyclic(f, k), 1.0);
  }
}

TEST(GowersCyclic, CharacterIsOne) {
  const std::size_t n = 16;
  std::vector<cdouble> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ang = 2.0 * std::numbers::pi * 3.0 * static_cast<double>(i) /
                       static_cast<double>(n);
    v[i] = cdouble(std::cos(ang), std::sin(ang));
  }
  EXPECT_NEAR(chowla::gowers_norm_cyclic(CyclicSignal(v), 2), 1.0, 1e-12);
}

TEST(GowersCyclic, MatchesNestedSumRandomSigns) {
  CyclicSignal f = random_pm1(401, 8);
  EXPECT_NEAR(chowla::gowers_norm_cyclic(f, 3), oracle_norm(f, 3), 1e-12);
}

TEST(GowersCyclic, MatchesNestedSumComplex) {
  CyclicSignal f = random_disc(402, 7);
  for (unsigned k = 1; k <= 3; ++k)
    EXPECT_NEAR(chowla::gowers_norm_cyclic(f, k), oracle_norm(f, k), 1e-12);
}

TEST(GowersCyclic, FirstOrderIsAbsoluteMean) {
  CyclicSignal f = random_disc(403, 23);
  cdouble mean = 0.0;
  for (const auto& z : f.values) mean += z;
  mean /= static_cast<double>(f.size());
  EXPECT_NEAR(chowla::gowers_norm_cyclic(f, 1), std::abs(mean), 1e-13);
}

TEST(GowersCyclic, RejectsBadInput) {
  CyclicSignal f(std::vector<cdouble>{1.0, -1.0});
  EXPECT_THROW(chowla::gowers_norm_cyclic(f, 0), std::invalid_argument);
  EXPECT_THROW(chowla::gowers_norm_cyclic(CyclicSignal{}, 2),
               std::invalid_argument);
  CyclicSignal bad(std::vector<cdouble>{
      1.0, cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0)});
  EXPECT_THROW(chowla::gowers_norm_cyclic(bad, 2), std::invalid_argument);
}

TEST(GowersCyclic, Monotone) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::vector<std::size_t>{8, 16, 32, 64}[trial % 4];
    CyclicSignal f = random_disc(500 + trial, n);
    const double u1 = chowla::gowers_norm_cyclic(f, 1);
    const double u2 = chowla::gowers_norm_cyclic(f, 2);
    const double u3 = chowla::gowers_norm_cyclic(f, 3);
    EXPECT_LE(u1, u2 + 1e-12);
    EXPECT_LE(u2, u3 + 1e-12);
  }
  // one higher-order spot check at a size where O(N^4) is still cheap
  CyclicSignal f = random_disc(601, 16);
  EXPECT_LE(chowla::gowers_norm_cyclic(f, 3),
            chowla::gowers_norm_cyclic(f, 4) + 1e-12);
}

TEST(GowersCyclic, PhaseInvariant) {
  CyclicSignal f = random_disc(602, 24);
  CyclicSignal g = f;
  const cdouble phase = std::polar(1.0, 0.8317);
  for (auto& z : g.values) z *= phase;
  for (unsigned k = 1; k <= 3; ++k)
    EXPECT_NEAR(chowla::gowers_norm_cyclic(f, k),
                chowla::gowers_norm_cyclic(g, k), 1e-12);
}

TEST(GowersCyclic, TranslationInvariant) {
  CyclicSignal f = random_disc(603, 24);
  CyclicSignal g;
  const std::size_t t = 7;
  g.values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    g.values[i] = f.values[(i + t) % f.size()];
  for (unsigned k = 1; k <= 3; ++k)
    EXPECT_NEAR(chowla::gowers_norm_cyclic(f, k),
                chowla::gowers_norm_cyclic(g, k), 1e-12);
}

TEST(GowersInterval, ConstantIsExactlyOne) {
  CyclicSignal f(std::vector<cdouble>(10, 1.0));
  for (unsigned k = 1; k <= 3; ++k)
    EXPECT_DOUBLE_EQ(chowla::gowers_norm_interval(f, k), 1.0);
}

TEST(GowersInterval, AlternatingMatchesNestedSum) {
  const std::size_t n = 12, np = 36;
  std::vector<cdouble> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CyclicSignal f(vals);

  std::vector<cdouble> padded(np, 0.0), window(np, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    padded[i + 1] = vals[i];
    window[i + 1] = 1.0;
  }
  const double expect = std::pow(oracle::gowers_pow_nested(padded, 2), 0.25) /
                        std::pow(oracle::gowers_pow_nested(window, 2), 0.25);
  EXPECT_NEAR(chowla::gowers_norm_interval(f, 2), expect, 1e-12);
}

TEST(GowersInterval, EmbeddingModulusIndependent) {
  for (int trial = 0; trial < 5; ++trial) {
    CyclicSignal f = random_disc(700 + trial, 20);
    for (unsigned k = 1; k <= 3; ++k) {
      const double a = chowla::gowers_norm_interval(f, k, 41);
      const double b = chowla::gowers_norm_interval(f, k, 60);
      const double c = chowla::gowers_norm_interval(f, k);
      EXPECT_NEAR(a, b, 1e-10);
      EXPECT_DOUBLE_EQ(b, c);  // 3N is the default
    }
  }
}

TEST(GowersInterval, RejectsTightModulus) {
  CyclicSignal f(std::vector<cdouble>(10, 1.0));
  EXPECT_THROW(chowla::gowers_norm_interval(f, 2, 20), std::invalid_argument);
}

TEST(GowersInterval, FastSecondOrderMatchesRecursion) {
  for (int trial = 0; trial < 5; ++trial) {
    CyclicSignal f = random_disc(720 + trial, 25);
    EXPECT_NEAR(chowla::gowers_u2_interval_fast(f),
                chowla::gowers_norm_interval(f, 2), 1e-10);
  }
}

TEST(GowersInterval, ZeroSignalIsZero) {
  CyclicSignal f(std::vector<cdouble>(40, 0.0));
  EXPECT_DOUBLE_EQ(chowla::gowers_norm_interval(f, 2), 0.0);
  EXPECT_DOUBLE_EQ(chowla::gowers_u2_interval_fast(f), 0.0);
}

TEST(GowersFft, ConstantAndCharacter) {
  CyclicSignal one(std::vector<cdouble>(16, 1.0));
  EXPECT_NEAR(chowla::gowers_u2_fft(one), 1.0, 1e-12);

  const std::size_t n = 128;
  std::vector<cdouble> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ang = 2.0 * std::numbers::pi * 5.0 * static_cast<double>(i) /
                       static_cast<double>(n);
    v[i] = cdouble(std::cos(ang), std::sin(ang));
  }
  EXPECT_NEAR(chowla::gowers_u2_fft(CyclicSignal(v)), 1.0, 1e-9);
}

TEST(GowersFft, MatchesDirectSecondOrder) {
  for (std::size_t n : {100u, 128u, 256u}) {
    CyclicSignal f = random_phase(800 + n, n);
    EXPECT_NEAR(chowla::gowers_u2_fft(f), chowla::gowers_norm_cyclic(f, 2),
                1e-9);
  }
}

TEST(WTrick, HandValues) {
  chowla::SieveTable table(1000);
  EXPECT_DOUBLE_EQ(chowla::w_tricked_von_mangoldt(table, 1, 2, 1),
                   std::log(3.0) / 2.0);
  EXPECT_NEAR(chowla::w_tricked_von_mangoldt(table, 1, 6, 2),
              std::log(13.0) / 3.0, 1e-13);
  EXPECT_NEAR(chowla::w_tricked_von_mangoldt(table, 1, 6, 4),
              std::log(5.0) / 3.0, 1e-13);
}

TEST(WTrick, Rejections) {
  chowla::SieveTable table(1000);
  EXPECT_THROW(chowla::w_tricked_von_mangoldt(table, 2, 6, 1),
               std::invalid_argument);
  EXPECT_THROW(chowla::w_tricked_von_mangoldt(table, 0, 6, 1),
               std::invalid_argument);
  EXPECT_THROW(chowla::w_tricked_von_mangoldt(table, 7, 6, 1),
               std::invalid_argument);
  EXPECT_THROW(chowla::w_tricked_von_mangoldt(table, 1, 6, 200),
               std::out_of_range);
}

TEST(UniformityScan, RowsCoverReducedResidues) {
  chowla::SieveTable table(5000);
  auto rows = chowla::uniformity_scan(table, {2, 3}, 2, 200);
  ASSERT_EQ(rows.size(), 3u);  // b=1 mod 2; b in {1,5} mod 6
  EXPECT_EQ(rows[0].w, 2u);
  EXPECT_EQ(rows[0].b, 1u);
  EXPECT_EQ(rows[1].w, 3u);
  EXPECT_EQ(rows[1].b, 1u);
  EXPECT_EQ(rows[2].b, 5u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.norm_order, 2u);
    EXPECT_EQ(r.n, 200u);
    EXPECT_GT(r.norm, 0.0);
  }
}

TEST(UniformityScan, FastPathMatchesRecursion) {
  chowla::SieveTable table(5000);
  auto rows = chowla::uniformity_scan(table, {2}, 2, 200);
  ASSERT_EQ(rows.size(), 1u);
  const double ratio = 0.5;  // phi(2)/2
  std::vector<cdouble> v;
  for (chowla::u64 i = 1; i <= 200; ++i)
    v.emplace_back(ratio * table.von_mangoldt(2 * i + 1) - 1.0, 0.0);
  EXPECT_NEAR(rows[0].norm,
              chowla::gowers_norm_interval(CyclicSignal(std::move(v)), 2),
              1e-9);
}

TEST(UniformityScan, RangeGuard) {
  chowla::SieveTable table(1000);
  EXPECT_THROW(chowla::uniformity_scan(table, {5}, 2, 200), std::out_of_range);
  EXPECT_THROW(chowla::uniformity_scan(table, {2}, 0, 200),
               std::invalid_argument);
}

chowla::BoundedTable flat_table(chowla::i64 lo, chowla::i64 hi, cdouble value) {
  chowla::BoundedTable t;
  t.base = lo;
  t.values.assign(static_cast<std::size_t>(hi - lo + 1), value);
  return t;
}

TEST(VonNeumann, ZeroNumeratorGivesZeroRatio) {
  chowla::VonNeumannInstance inst;
  inst.n_range = 32;
  inst.w_factor = 1;
  inst.theta.assign(32, 0.0);
  inst.phis = {flat_table(0, 70, 1.0)};
  inst.a = {1};
  inst.b = {1};
  inst.r = {0};
  const auto res = chowla::von_neumann_ratio(inst, 2);
  EXPECT_DOUBLE_EQ(res.lhs, 0.0);
  EXPECT_DOUBLE_EQ(res.ratio, 0.0);
}

TEST(VonNeumann, AllOnesGivesUnitRatio) {
  chowla::VonNeumannInstance inst;
  inst.n_range = 32;
  inst.w_factor = 1;
  inst.theta.assign(32, 1.0);
  inst.phis = {flat_table(0, 70, 1.0), flat_table(0, 140, 1.0)};
  inst.a = {1, 1};
  inst.b = {1, 2};
  inst.r = {0, 0};
  const auto res = chowla::von_neumann_ratio(inst, 2);
  EXPECT_NEAR(res.lhs, 1.0, 1e-12);
  EXPECT_NEAR(res.norm, 1.0, 1e-12);
  EXPECT_NEAR(res.ratio, 1.0, 1e-12);
}

TEST(VonNeumann, RandomInstanceMatchesDirectAverage) {
  const chowla::u64 N = 512;
  chowla::VonNeumannInstance inst;
  inst.n_range = N;
  inst.w_factor = 1;
  chowla::CounterRng rng(909);
  inst.theta.resize(N);
  for (std::size_t i = 0; i < N; ++i)
    inst.theta[i] = rng.at(i) & 1 ? 1.0 : -1.0;
  auto random_table = [&](chowla::u64 salt, chowla::i64 lo, chowla::i64 hi) {
    chowla::BoundedTable t;
    t.base = lo;
    t.values.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t i = 0; i < t.values.size(); ++i)
      t.values[i] = chowla::CounterRng(salt).at(i) & 1 ? 1.0 : -1.0;
    return t;
  };
  inst.phis = {random_table(31, 2, 1024), random_table(37, 3, 1536)};
  inst.a = {1, 1};
  inst.b = {1, 2};
  inst.r = {0, 0};

  const auto res = chowla::von_neumann_ratio(inst, 2);

  cdouble acc = 0.0;
  for (chowla::u64 d = 1; d <= N; ++d)
    for (chowla::u64 n = 1; n <= N; ++n)
      acc += inst.theta[d - 1] *
             inst.phis[0].at(static_cast<chowla::i64>(n + d)) *
             inst.phis[1].at(static_cast<chowla::i64>(n + 2 * d));
  const double direct = std::abs(acc) / (static_cast<double>(N) * N);
  EXPECT_NEAR(res.lhs, direct, 1e-12);
  EXPECT_NEAR(res.norm,
              chowla::gowers_norm_interval(CyclicSignal(inst.theta), 2), 1e-12);
  EXPECT_GE(res.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(res.ratio));
}

TEST(VonNeumann, RejectsBadInstances) {
  chowla::VonNeumannInstance inst;
  inst.n_range = 512;
  inst.w_factor = 2;  // 2 > 512^0.1
  inst.theta.assign(256, 0.5);
  EXPECT_THROW(chowla::von_neumann_ratio(inst, 2), std::invalid_argument);

  inst.w_factor = 1;
  inst.theta.assign(512, 2.0);  // exceeds unit bound
  EXPECT_THROW(chowla::von_neumann_ratio(inst, 2), std::invalid_argument);

  inst.theta.assign(512, 0.5);
  inst.phis = {flat_table(0, 10, 1.0)};  // too short for the argument range
  inst.a = {1};
  inst.b = {1};
  inst.r = {0};
  EXPECT_THROW(chowla::von_neumann_ratio(inst, 2), std::invalid_argument);
}

TEST(GcsCheck, TrivialEquality) {
  CyclicSignal one(std::vector<cdouble>(8, 1.0));
  std::vector<CyclicSignal> phis = {one, one};
  std::vector<chowla::LinearForm> forms = {{{0, 1}}, {{1, 0}}};
  const auto res = chowla::gcs_check(one, phis, forms);
  EXPECT_NEAR(res.lhs, 1.0, 1e-12);
  EXPECT_NEAR(res.norm, 1.0, 1e-12);
  EXPECT_TRUE(res.passed);
}

TEST(GcsCheck, RandomUnimodularSecondOrder) {
  for (int trial = 0; trial < 20; ++trial) {
    CyclicSignal theta = random_phase(1000 + trial, 32);
    std::vector<CyclicSignal> phis = {random_phase(1100 + trial, 32),
                                      random_phase(1200 + trial, 32)};
    chowla::CounterRng rng(1300 + trial);
    std::vector<chowla::LinearForm> forms = {
        {{0, static_cast<chowla::i64>(rng.below(0, 5)) - 2}},
        {{static_cast<chowla::i64>(rng.below(1, 5)) - 2, 0}}};
    const auto res = chowla::gcs_check(theta, phis, forms);
    EXPECT_TRUE(res.passed) << "lhs " << res.lhs << " vs norm " << res.norm;
  }
}

TEST(GcsCheck, RandomSignsThirdOrder) {
  for (int trial = 0; trial < 10; ++trial) {
    CyclicSignal theta = random_pm1(1400 + trial, 16);
    std::vector<CyclicSignal> phis = {random_pm1(1500 + trial, 16),
                                      random_pm1(1600 + trial, 16),
                                      random_pm1(1700 + trial, 16)};
    std::vector<chowla::LinearForm> forms = {
        {{0, 1, 1}}, {{1, 0, 2}}, {{1, 1, 0}}};
    const auto res = chowla::gcs_check(theta, phis, forms);
    EXPECT_TRUE(res.passed) << "lhs " << res.lhs << " vs norm " << res.norm;
  }
}

TEST(GcsCheck, RejectsSelfDependentForm) {
  CyclicSignal one(std::vector<cdouble>(8, 1.0));
  std::vector<CyclicSignal> phis = {one, one};
  std::vector<chowla::LinearForm> bad = {{{1, 0}}, {{1, 0}}};
  EXPECT_THROW(chowla::gcs_check(one, phis, bad), std::invalid_argument);

  CyclicSignal big(std::vector<cdouble>(8, 3.0));
  std::vector<chowla::LinearForm> forms = {{{0, 1}}, {{1, 0}}};
  EXPECT_THROW(chowla::gcs_check(big, phis, forms), std::invalid_argument);
  EXPECT_THROW(chowla::gcs_check(one, {one, big}, forms),
               std::invalid_argument);

  CyclicSignal shorter(std::vector<cdouble>(4, 1.0));
  EXPECT_THROW(chowla::gcs_check(one, {one, shorter}, forms),
               std::invalid_argument);
}

}  // namespace
