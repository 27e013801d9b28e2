#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Rank statistics and similarity primitives. Everything here is a pure
// function; inputs are never modified.
namespace froq::stats {

/// Fractional (average) ranks, 1-based. Ties share the mean of the ranks
/// they span, so the result always sums to n(n+1)/2.
/// Throws InvalidScore on non-finite input.
std::vector<double> rank(std::span<const double> values);

/// Pearson correlation of two equally sized samples.
/// Throws ShapeError on length mismatch or n < 2, DegenerateInput when either
/// side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Spearman's rank correlation: Pearson correlation of `rank(a)` and
/// `rank(b)`. An all-tied argument is a DegenerateInput error rather than 0.
double spearman(std::span<const double> a, std::span<const double> b);

/// dot(u, v) / (|u| |v|), accumulated in double precision.
/// Throws ShapeError on dimension mismatch, DegenerateInput on a zero vector.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Discrete lower quantile used for discard cut-offs.
///
/// Returns t such that `count(v < t) / n` is the largest achievable fraction
/// not exceeding `p`. The count is always a realizable subset size: tied
/// values are either all below t or all at/above it. t is an element of `v`
/// except when every element is discarded, in which case it is the next
/// representable value above the maximum.
/// Throws InvalidParameter for p outside [0, 1] and on empty input.
double quantile_threshold(std::span<const double> values, double p);

/// Number of elements strictly below `threshold`.
std::size_t count_below(std::span<const double> values, double threshold);

/// Validates that every element is finite; throws InvalidScore otherwise.
void require_finite(std::span<const double> values);

}  // namespace froq::stats
