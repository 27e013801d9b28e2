#pragma once

// Reference implementations written independently of the library, used as
// test oracles. They favor obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "froq/stats.hpp"

namespace froq::oracle {

/// Average ranks by explicit counting: rank = (#less) + (#equal + 1) / 2.
inline std::vector<long double> ranks(const std::vector<double>& v) {
  std::vector<long double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double x : v) {
      less += x < v[i];
      equal += x == v[i];
    }
    out[i] = static_cast<long double>(less) + (static_cast<long double>(equal) + 1.0L) / 2.0L;
  }
  return out;
}

/// Rank-then-Pearson in extended precision with a two-pass mean.
/// nullopt when either side has zero rank variance.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const long double n = static_cast<long double>(a.size());
  const long double ma = std::accumulate(ra.begin(), ra.end(), 0.0L) / n;
  const long double mb = std::accumulate(rb.begin(), rb.end(), 0.0L) / n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::nullopt;
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

/// sqrt of the sum of squares, accumulated in long double.
inline double l2_norm(const std::vector<float>& values) {
  long double sum = 0;
  for (float v : values) sum += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(sum));
}

struct GreedyEval {
  std::size_t step;
  std::vector<std::size_t> set;  // column indices, K^n order then the candidate
  double correlation;
};

struct GreedyOutcome {
  std::vector<std::size_t> top;       // L^b, best first
  std::vector<GreedyEval> trace;
  std::vector<std::size_t> selected;  // K
  double selected_correlation = 0.0;
};

/// Step-by-step forward selection over column-major data. Correlations come
/// from froq::stats::spearman (validated separately against `spearman`
/// above) so that the comparison with the library is exact.
inline GreedyOutcome greedy(const std::vector<std::vector<double>>& columns,
                            const std::vector<double>& labels, std::size_t b) {
  const auto corr = [&](const std::vector<double>& v) -> double {
    try {
      return froq::stats::spearman(labels, v);
    } catch (...) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<std::pair<double, std::size_t>> singles;
  for (std::size_t l = 0; l < columns.size(); ++l) {
    try {
      singles.emplace_back(froq::stats::spearman(labels, columns[l]), l);
    } catch (...) {
      // constant column: excluded
    }
  }
  // Best first; equal correlations keep the earlier column first.
  for (std::size_t i = 0; i < singles.size(); ++i) {
    for (std::size_t j = i + 1; j < singles.size(); ++j) {
      const bool better = singles[j].first > singles[i].first ||
                          (singles[j].first == singles[i].first && singles[j].second < singles[i].second);
      if (better) std::swap(singles[i], singles[j]);
    }
  }
  GreedyOutcome out;
  for (std::size_t i = 0; i < std::min(b, singles.size()); ++i) out.top.push_back(singles[i].second);
  if (out.top.empty()) return out;
  for (std::size_t i = 0; i < out.top.size(); ++i) {
    out.trace.push_back({1, {out.top[i]}, singles[i].first});
  }

  std::vector<std::size_t> chosen{out.top[0]};
  std::vector<double> prefix{singles[0].first};
  std::vector<std::size_t> remaining(out.top.begin() + 1, out.top.end());
  std::sort(remaining.begin(), remaining.end());  // column order
  for (std::size_t step = 2; step <= out.top.size(); ++step) {
    double best = 0;
    std::size_t best_col = 0;
    bool have = false;
    for (std::size_t cand : remaining) {
      std::vector<std::size_t> set = chosen;
      set.push_back(cand);
      std::vector<double> joint(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) {
        double s = 0;
        for (std::size_t c : set) s += columns[c][i];
        joint[i] = s / static_cast<double>(set.size());
      }
      const double c = corr(joint);
      out.trace.push_back({step, set, c});
      if (!have || c > best) {
        best = c;
        best_col = cand;
        have = true;
      }
    }
    chosen.push_back(best_col);
    prefix.push_back(best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best_col));
  }
  std::size_t n = 0;
  for (std::size_t i = 1; i < prefix.size(); ++i) {
    if (prefix[i] > prefix[n]) n = i;
  }
  out.selected.assign(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(n) + 1);
  out.selected_correlation = prefix[n];
  return out;
}

/// Correlation of the mean of the given columns with the labels.
inline double joint_correlation(const std::vector<std::vector<double>>& columns,
                                const std::vector<std::size_t>& set,
                                const std::vector<double>& labels) {
  std::vector<double> joint(labels.size(), 0.0);
  for (std::size_t c : set) {
    for (std::size_t i = 0; i < joint.size(); ++i) joint[i] += columns[c][i];
  }
  for (auto& v : joint) v /= static_cast<double>(set.size());
  return spearman(labels, joint).value_or(-std::numeric_limits<double>::infinity());
}

/// Correlations of all 2^k - 1 non-empty subsets of `candidates`.
inline std::vector<double> all_subset_correlations(const std::vector<std::vector<double>>& columns,
                                                   const std::vector<std::size_t>& candidates,
                                                   const std::vector<double>& labels) {
  std::vector<double> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << candidates.size()); ++mask) {
    std::vector<std::size_t> set;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (mask & (std::size_t{1} << i)) set.push_back(candidates[i]);
    }
    out.push_back(joint_correlation(columns, set, labels));
  }
  return out;
}

}  // namespace froq::oracle
