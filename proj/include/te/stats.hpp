#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace te::stats {

struct SummaryStats {
  double mean = 0.0;
  double sem = 0.0;  // NaN when n < 2
  double median = 0.0;
  double iqr = 0.0;
  std::size_t n = 0;
};

double mean(std::span<const double> xs);

/// Sample standard deviation (n - 1 denominator). Requires n >= 2.
double stddev(std::span<const double> xs);

/// Standard error of the mean, stddev / sqrt(n). Requires n >= 2.
double sem(std::span<const double> xs);

/// Quantile of already-sorted data by linear interpolation between order
/// statistics at position (n - 1) * q.
double quantile_sorted(std::span<const double> sorted, double q);

struct MedianIqr {
  double median = 0.0;
  double iqr = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Median and interquartile range (Q3 - Q1) under the interpolation rule above.
MedianIqr median_iqr(std::span<const double> values);

SummaryStats summarize(std::span<const double> values);

/// Product-moment correlation. Throws LengthMismatch, DegenerateVariance, or
/// InvalidArgument (fewer than two points).
double pearson(std::span<const double> x, std::span<const double> y);

/// Midranks (1-based) of the pooled values, ties sharing their average rank.
std::vector<double> midranks(std::span<const double> values);

/// Two-sided Mann-Whitney test by exhaustive enumeration of rank splits.
/// Feasible only for small samples (|a| + |b| <= 20).
double rank_sum_exact(std::span<const double> a, std::span<const double> b);

/// Two-sided Mann-Whitney test, normal approximation with tie-corrected
/// variance and a 0.5 continuity correction.
double rank_sum_normal(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kExactRankSumMaxTotal = 12;

/// Exact enumeration when |a| + |b| <= 12, normal approximation otherwise.
double rank_sum(std::span<const double> a, std::span<const double> b);

struct BreakOff {
  int level = 0;          // punishments administered before the run ended
  bool obedient = false;  // completed every level
};

/// Fraction of subjects still in the experiment at each level 0..n_levels:
/// entry L counts subjects whose run went past level L; obedient subjects are
/// counted through the final level.
std::vector<double> survival_curve(std::span<const BreakOff> break_offs, int n_levels = 30);

/// Two-sided standard normal tail probability P(|Z| >= |z|).
double normal_two_sided_p(double z);

}  // namespace te::stats
