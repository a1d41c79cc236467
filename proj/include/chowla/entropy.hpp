#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chowla/util.hpp"

namespace chowla {

// Finite joint law: each cell is a tuple of `arity` labels plus a
// probability.  Cells are whatever the producer observed; zero-probability
// cells are permitted and contribute nothing to any entropy.
struct JointDistribution {
  std::size_t arity = 0;
  std::vector<u64> labels;  // arity entries per cell, flat
  std::vector<double> probs;

  std::size_t cell_count() const { return probs.size(); }

  const u64* cell(std::size_t c) const { return labels.data() + c * arity; }

  void validate() const {
    if (arity == 0) throw std::invalid_argument("distribution needs arity >= 1");
    if (labels.size() != probs.size() * arity)
      throw std::invalid_argument("label table does not match cell count");
    double sum = 0.0, comp = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0))
        throw std::invalid_argument("negative or nonfinite probability");
      const double y = p - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("probabilities sum to " + format_double(sum) +
                                  ", not 1");
  }
};

namespace detail {

inline void check_axes(const JointDistribution& d,
                       const std::vector<std::size_t>& axes) {
  for (std::size_t a : axes)
    if (a >= d.arity) throw std::invalid_argument("axis index out of range");
}

inline void check_disjoint(const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b) {
  for (std::size_t x : a)
    for (std::size_t y : b)
      if (x == y)
        throw std::invalid_argument("axis sets must be disjoint");
}

// Cells projected onto the given axes, sorted and merged.  Keys keep the
// axis order passed in, so callers can group by a prefix.
inline std::vector<std::pair<std::vector<u64>, double>> project(
    const JointDistribution& d, const std::vector<std::size_t>& axes) {
  check_axes(d, axes);
  std::vector<std::pair<std::vector<u64>, double>> rows;
  rows.reserve(d.cell_count());
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    std::vector<u64> key(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) key[i] = d.cell(c)[axes[i]];
    rows.emplace_back(std::move(key), d.probs[c]);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double sum = 0.0, comp = 0.0;
    for (; j < rows.size() && rows[j].first == rows[i].first; ++j) {
      const double y = rows[j].second - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (out != i) rows[out].first = std::move(rows[i].first);
    rows[out].second = sum;
    ++out;
    i = j;
  }
  rows.resize(out);
  return rows;
}

inline double plogq(double p, double q) {
  return p > 0.0 ? p * std::log(q / p) : 0.0;
}

// Nonnegativity guard shared by the information quantities: plug-in values
// are nonnegative in exact arithmetic, so anything beyond rounding noise is
// a computation bug rather than data.
inline double clamp_information(double v, const char* what) {
  if (v < 0.0) {
    if (v < -1e-12)
      throw std::runtime_error(std::string(what) + " came out " +
                               format_double(v) + ", beyond rounding noise");
    return 0.0;
  }
  return v;
}

}  // namespace detail

// Natural-log entropy of the marginal on the chosen axes (0 log 0 = 0).
inline double entropy_of(const JointDistribution& d,
                         const std::vector<std::size_t>& axes) {
  d.validate();
  const auto rows = detail::project(d, axes);
  double h = 0.0, comp = 0.0;
  for (const auto& [key, p] : rows) {
    const double y = detail::plogq(p, 1.0) - comp;
    const double t = h + y;
    comp = (t - h) - y;
    h = t;
  }
  return h;
}

inline double entropy(const JointDistribution& d) {
  std::vector<std::size_t> all(d.arity);
  for (std::size_t i = 0; i < d.arity; ++i) all[i] = i;
  return entropy_of(d, all);
}

// H(target | given) by the definition: average over conditioning cells of
// the entropy of the conditioned law.
inline double conditional_entropy(const JointDistribution& d,
                                  const std::vector<std::size_t>& target,
                                  const std::vector<std::size_t>& given) {
  d.validate();
  detail::check_disjoint(target, given);
  if (given.empty()) return entropy_of(d, target);
  std::vector<std::size_t> axes = given;
  axes.insert(axes.end(), target.begin(), target.end());
  const auto rows = detail::project(d, axes);

  double h = 0.0, comp = 0.0;
  auto add = [&](double v) {
    const double y = v - comp;
    const double t = h + y;
    comp = (t - h) - y;
    h = t;
  };
  const std::size_t g = given.size();
  auto same_group = [&](const std::vector<u64>& a, const std::vector<u64>& b) {
    return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(g),
                      b.begin());
  };
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double mass = 0.0, mcomp = 0.0;
    for (; j < rows.size() && same_group(rows[j].first, rows[i].first); ++j) {
      const double y = rows[j].second - mcomp;
      const double t = mass + y;
      mcomp = (t - mass) - y;
      mass = t;
    }
    if (mass > 0.0)
      for (std::size_t c = i; c < j; ++c)
        add(detail::plogq(rows[c].second, mass));
    i = j;
  }
  return h;
}

// I(A : B) = H(A) - H(A | B), clamped against rounding noise.
inline double mutual_information(const JointDistribution& d,
                                 const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
  detail::check_disjoint(a, b);
  return detail::clamp_information(
      entropy_of(d, a) - conditional_entropy(d, a, b), "mutual information");
}

// I(A : B | Z) = H(A | Z) - H(A | B, Z).
inline double conditional_mutual_information(
    const JointDistribution& d, const std::vector<std::size_t>& a,
    const std::vector<std::size_t>& b, const std::vector<std::size_t>& given) {
  detail::check_disjoint(a, b);
  detail::check_disjoint(a, given);
  detail::check_disjoint(b, given);
  std::vector<std::size_t> bz = b;
  bz.insert(bz.end(), given.begin(), given.end());
  return detail::clamp_information(
      conditional_entropy(d, a, given) - conditional_entropy(d, a, bz),
      "conditional mutual information");
}

struct ContinuityResult {
  double lhs = 0.0;        // |H(d1) - H(d2)|
  double rhs = 0.0;        // 6 * sqrt(max gap) * alphabet size
  double max_gap = 0.0;    // max over outcomes of |P1 - P2|
  std::size_t alphabet = 0;
  bool passed = false;
};

// Entropy comparison bound.  For p(t) = t log(1/t) on [0,1] the derivative
// is log(1/t) - 1, and integrating |p'| over a window of width delta gives
// |p(x) - p(y)| <= delta log(1/delta) + 2 delta <= 3 delta log(2/delta),
// and sqrt(delta) log(2/delta) <= 2 on (0,1], so each outcome contributes
// at most 6 sqrt(delta).  Summing over the joint alphabet yields the bound.
inline ContinuityResult entropy_continuity_check(const JointDistribution& d1,
                                                 const JointDistribution& d2) {
  d1.validate();
  d2.validate();
  if (d1.arity != d2.arity)
    throw std::invalid_argument("outcome alphabets have different arity");
  std::vector<std::size_t> all(d1.arity);
  for (std::size_t i = 0; i < d1.arity; ++i) all[i] = i;
  auto r1 = detail::project(d1, all);
  auto r2 = detail::project(d2, all);

  ContinuityResult res;
  std::size_t i = 0, j = 0;
  while (i < r1.size() || j < r2.size()) {
    double p1 = 0.0, p2 = 0.0;
    if (j >= r2.size() || (i < r1.size() && r1[i].first < r2[j].first)) {
      p1 = r1[i++].second;
    } else if (i >= r1.size() || r2[j].first < r1[i].first) {
      p2 = r2[j++].second;
    } else {
      p1 = r1[i++].second;
      p2 = r2[j++].second;
    }
    res.max_gap = std::max(res.max_gap, std::abs(p1 - p2));
    ++res.alphabet;
  }
  res.lhs = std::abs(entropy(d1) - entropy(d2));
  res.rhs = 6.0 * std::sqrt(res.max_gap) * static_cast<double>(res.alphabet);
  res.passed = res.lhs <= res.rhs + 1e-12;
  return res;
}

}  // namespace chowla
