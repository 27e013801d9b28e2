#include "froq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "froq/error.hpp"

namespace froq::stats {

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorKind::kInvalidScore,
           "non-finite value at index " + std::to_string(i));
    }
  }
}

std::vector<double> rank(std::span<const double> values) {
  require_finite(values);
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  std::vector<double> ranks(n);
  std::size_t block_start = 0;
  while (block_start < n) {
    std::size_t block_end = block_start + 1;
    while (block_end < n && values[order[block_end]] == values[order[block_start]]) {
      ++block_end;
    }
    // Ranks block_start+1 .. block_end averaged.
    const double shared = static_cast<double>(block_start + 1 + block_end) / 2.0;
    for (std::size_t k = block_start; k < block_end; ++k) ranks[order[k]] = shared;
    block_start = block_end;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kShape, "length mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) fail(ErrorKind::kShape, "correlation needs at least 2 samples");

  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    fail(ErrorKind::kDegenerateInput, "zero variance (all values tied)");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kShape, "length mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  const auto ra = rank(a);
  const auto rb = rank(b);
  return pearson(ra, rb);
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    fail(ErrorKind::kShape, "dimension mismatch: " + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()));
  }
  if (u.empty()) fail(ErrorKind::kShape, "empty vectors");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u[i];
    const double y = v[i];
    dot += x * y;
    uu += x * x;
    vv += y * y;
  }
  if (!std::isfinite(dot) || !std::isfinite(uu) || !std::isfinite(vv)) {
    fail(ErrorKind::kInvalidScore, "non-finite embedding");
  }
  if (uu == 0.0 || vv == 0.0) {
    fail(ErrorKind::kDegenerateInput, "zero-norm vector in cosine similarity");
  }
  // sqrt(uu * vv) makes cos(u, u) exactly 1; the split form only guards
  // against the product leaving the representable range.
  const double norms = uu * vv;
  const double denom = std::isnormal(norms) ? std::sqrt(norms) : std::sqrt(uu) * std::sqrt(vv);
  return std::clamp(dot / denom, -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  return cosine_impl(u, v);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  return cosine_impl(u, v);
}

std::size_t count_below(std::span<const double> values, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double x) { return x < threshold; }));
}

double quantile_threshold(std::span<const double> values, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "quantile fraction must lie in [0, 1]");
  }
  if (values.empty()) fail(ErrorKind::kInvalidParameter, "quantile of an empty set");
  require_finite(values);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  // Grid fractions such as 0.29 are not exact in binary; the small slack keeps
  // p * n from landing just under an integer it mathematically equals.
  const auto budget = static_cast<std::size_t>(
      std::floor(p * static_cast<double>(n) + 1e-9));
  if (budget >= n) {
    return std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
  }
  // count(v < sorted[k]) is the index of the first element equal to sorted[k];
  // move down to the start of the tie block containing position `budget`.
  std::size_t k = budget;
  while (k > 0 && sorted[k - 1] == sorted[k]) --k;
  return sorted[k];
}

}  // namespace froq::stats
