#include "chowla/entropy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using chowla::JointDistribution;
using chowla::u64;

JointDistribution make_dist(std::size_t arity, std::vector<u64> labels,
                            std::vector<double> probs) {
  JointDistribution d;
  d.arity = arity;
  d.labels = std::move(labels);
  d.probs = std::move(probs);
  return d;
}

// random strictly positive law on an n1 x n2 (x n3) grid
JointDistribution random_grid(chowla::u64 seed, std::size_t n1, std::size_t n2,
                              std::size_t n3 = 0) {
  chowla::CounterRng rng(seed);
  JointDistribution d;
  d.arity = n3 == 0 ? 2 : 3;
  std::vector<double> raw;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < std::max<std::size_t>(n3, 1); ++k) {
        d.labels.push_back(i);
        d.labels.push_back(j);
        if (n3 != 0) d.labels.push_back(k);
        raw.push_back(0.05 + rng.uniform01(raw.size()));
      }
  double total = 0.0;
  for (double v : raw) total += v;
  for (double v : raw) d.probs.push_back(v / total);
  return d;
}

TEST(Entropy, UniformSixOutcomes) {
  JointDistribution d = make_dist(
      1, {0, 1, 2, 3, 4, 5},
      std::vector<double>(6, 1.0 / 6.0));
  EXPECT_NEAR(chowla::entropy(d), std::log(6.0), 1e-12);
}

TEST(Entropy, BernoulliQuarter) {
  JointDistribution d = make_dist(1, {0, 1}, {0.25, 0.75});
  const double expect = 0.25 * std::log(4.0) + 0.75 * std::log(4.0 / 3.0);
  EXPECT_NEAR(chowla::entropy(d), expect, 1e-12);
}

TEST(Entropy, IndependentAxesHaveZeroInformation) {
  std::vector<u64> labels;
  std::vector<double> probs;
  for (u64 i = 0; i < 2; ++i)
    for (u64 j = 0; j < 3; ++j) {
      labels.insert(labels.end(), {i, j});
      probs.push_back(1.0 / 6.0);
    }
  JointDistribution d = make_dist(2, labels, probs);
  EXPECT_NEAR(chowla::mutual_information(d, {0}, {1}), 0.0, 1e-12);
}

TEST(Entropy, IdenticalAxesShareFullInformation) {
  JointDistribution d = make_dist(2, {0, 0, 1, 1}, {0.5, 0.5});
  EXPECT_NEAR(chowla::mutual_information(d, {0}, {1}), std::log(2.0), 1e-12);
}

TEST(Entropy, BothInformationFormulasAgree) {
  for (int trial = 0; trial < 10; ++trial) {
    JointDistribution d = random_grid(2000 + trial, 4, 5);
    const double ab = chowla::entropy_of(d, {0}) -
                      chowla::conditional_entropy(d, {0}, {1});
    const double ba = chowla::entropy_of(d, {1}) -
                      chowla::conditional_entropy(d, {1}, {0});
    EXPECT_NEAR(ab, ba, 1e-10);
    EXPECT_NEAR(chowla::mutual_information(d, {0}, {1}), ab, 1e-10);
  }
}

TEST(Entropy, ConditionalInformationFormulasAgree) {
  for (int trial = 0; trial < 10; ++trial) {
    JointDistribution d = random_grid(2100 + trial, 3, 4, 3);
    const double xy = chowla::conditional_entropy(d, {0}, {2}) -
                      chowla::conditional_entropy(d, {0}, {1, 2});
    const double yx = chowla::conditional_entropy(d, {1}, {2}) -
                      chowla::conditional_entropy(d, {1}, {0, 2});
    EXPECT_NEAR(xy, yx, 1e-10);
    EXPECT_NEAR(chowla::conditional_mutual_information(d, {0}, {1}, {2}), xy,
                1e-10);
  }
}

TEST(Entropy, ChainRule) {
  for (int trial = 0; trial < 10; ++trial) {
    JointDistribution d = random_grid(2200 + trial, 4, 4);
    EXPECT_NEAR(chowla::entropy(d),
                chowla::entropy_of(d, {1}) +
                    chowla::conditional_entropy(d, {0}, {1}),
                1e-10);
  }
}

TEST(Entropy, ConditioningReducesEntropy) {
  for (int trial = 0; trial < 10; ++trial) {
    JointDistribution d = random_grid(2300 + trial, 4, 3, 4);
    EXPECT_LE(chowla::conditional_entropy(d, {0}, {1}),
              chowla::entropy_of(d, {0}) + 1e-12);
    EXPECT_LE(chowla::conditional_entropy(d, {0}, {1, 2}),
              chowla::conditional_entropy(d, {0}, {2}) + 1e-12);
    EXPECT_GE(chowla::conditional_mutual_information(d, {0}, {1}, {2}), 0.0);
  }
}

TEST(Entropy, EmptyConditioningIsNoOp) {
  JointDistribution d = random_grid(2400, 4, 4);
  EXPECT_DOUBLE_EQ(chowla::conditional_entropy(d, {0}, {}),
                   chowla::entropy_of(d, {0}));
}

TEST(Entropy, ZeroProbabilityCellsAreInert) {
  JointDistribution d = make_dist(1, {0, 1}, {0.5, 0.5});
  JointDistribution padded = make_dist(1, {0, 1, 2}, {0.5, 0.5, 0.0});
  EXPECT_DOUBLE_EQ(chowla::entropy(d), chowla::entropy(padded));
}

TEST(Entropy, Validation) {
  JointDistribution bad_sum = make_dist(1, {0, 1}, {0.5, 0.4});
  EXPECT_THROW(chowla::entropy(bad_sum), std::invalid_argument);
  JointDistribution negative = make_dist(1, {0, 1}, {1.5, -0.5});
  EXPECT_THROW(chowla::entropy(negative), std::invalid_argument);
  JointDistribution d = make_dist(2, {0, 0, 1, 1}, {0.5, 0.5});
  EXPECT_THROW(chowla::entropy_of(d, {5}), std::invalid_argument);
  EXPECT_THROW(chowla::mutual_information(d, {0}, {0}),
               std::invalid_argument);
  EXPECT_THROW(chowla::conditional_mutual_information(d, {0}, {1}, {1}),
               std::invalid_argument);
}

TEST(EntropyContinuity, IdenticalLawsTrivial) {
  JointDistribution d = random_grid(2500, 3, 3);
  const auto res = chowla::entropy_continuity_check(d, d);
  EXPECT_DOUBLE_EQ(res.lhs, 0.0);
  EXPECT_DOUBLE_EQ(res.max_gap, 0.0);
  EXPECT_TRUE(res.passed);
}

TEST(EntropyContinuity, PerturbedCoin) {
  JointDistribution d1 = make_dist(1, {0, 1}, {0.5, 0.5});
  JointDistribution d2 = make_dist(1, {0, 1}, {0.51, 0.49});
  const auto res = chowla::entropy_continuity_check(d1, d2);
  EXPECT_NEAR(res.max_gap, 0.01, 1e-15);
  EXPECT_EQ(res.alphabet, 2u);
  EXPECT_TRUE(res.passed);
}

TEST(EntropyContinuity, RandomPairs) {
  for (int trial = 0; trial < 100; ++trial) {
    chowla::CounterRng rng(2600 + trial);
    auto draw = [&](chowla::u64 salt) {
      std::vector<double> raw(8);
      double total = 0.0;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = 0.01 + chowla::CounterRng(salt).uniform01(i);
        total += raw[i];
      }
      for (double& v : raw) v /= total;
      return make_dist(1, {0, 1, 2, 3, 4, 5, 6, 7}, raw);
    };
    const auto res = chowla::entropy_continuity_check(draw(rng.at(0)),
                                                      draw(rng.at(1)));
    EXPECT_TRUE(res.passed) << "lhs " << res.lhs << " rhs " << res.rhs;
  }
}

TEST(EntropyContinuity, DisjointSupportsStillBounded) {
  JointDistribution d1 = make_dist(1, {0, 1}, {0.5, 0.5});
  JointDistribution d2 = make_dist(1, {2, 3}, {0.5, 0.5});
  const auto res = chowla::entropy_continuity_check(d1, d2);
  EXPECT_EQ(res.alphabet, 4u);
  EXPECT_TRUE(res.passed);
}

TEST(EntropyContinuity, ArityMismatchRejected) {
  JointDistribution d1 = make_dist(1, {0, 1}, {0.5, 0.5});
  JointDistribution d2 = make_dist(2, {0, 0, 1, 1}, {0.5, 0.5});
  EXPECT_THROW(chowla::entropy_continuity_check(d1, d2),
               std::invalid_argument);
}

}  // namespace
