#include "te/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "te/error.hpp"

namespace te::stats {

namespace {

void require_nonempty(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw Error(ErrorCode::Empty, std::string(what) + " of an empty sample");
}

}  // namespace

double mean(std::span<const double> xs) {
  require_nonempty(xs, "mean");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorCode::Empty, "standard deviation needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double sem(std::span<const double> xs) {
  return stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  require_nonempty(sorted, "quantile");
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MedianIqr median_iqr(std::span<const double> values) {
  require_nonempty(values, "median");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  MedianIqr out;
  out.median = quantile_sorted(v, 0.5);
  out.q1 = quantile_sorted(v, 0.25);
  out.q3 = quantile_sorted(v, 0.75);
  out.iqr = std::max(0.0, out.q3 - out.q1);
  return out;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.n = values.size();
  s.mean = mean(values);
  s.sem = values.size() >= 2 ? sem(values) : std::numeric_limits<double>::quiet_NaN();
  const auto mi = median_iqr(values);
  s.median = mi.median;
  s.iqr = mi.iqr;
  return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "pearson needs at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateVariance, "constant input to pearson");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

}  // namespace

double rank_sum_exact(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::Empty, "rank_sum needs two non-empty samples");
  const std::size_t n = a.size() + b.size();
  if (n > 20) throw Error(ErrorCode::InvalidArgument, "exact rank-sum limited to 20 pooled values");
  const auto ranks = midranks(pooled(a, b));
  const double expected = static_cast<double>(a.size()) * static_cast<double>(n + 1) / 2.0;
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += ranks[i];
  const double dev = std::abs(observed - expected);
  // Midranks are multiples of 1/2, so a small slack absorbs summation error.
  constexpr double kSlack = 1e-9;

  std::uint64_t extreme = 0, total = 0;
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != a.size()) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += ranks[i];
    }
    ++total;
    if (std::abs(s - expected) >= dev - kSlack) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double rank_sum_normal(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::Empty, "rank_sum needs two non-empty samples");
  const auto all = pooled(a, b);
  const auto ranks = midranks(all);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;

  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  const double u = r1 - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;

  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;  // every value tied
  const double dev = std::max(0.0, std::abs(u - mu) - 0.5);
  return std::min(1.0, normal_two_sided_p(dev / std::sqrt(var)));
}

double rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.size() + b.size() <= kExactRankSumMaxTotal) return rank_sum_exact(a, b);
  return rank_sum_normal(a, b);
}

std::vector<double> survival_curve(std::span<const BreakOff> break_offs, int n_levels) {
  if (break_offs.empty()) throw Error(ErrorCode::Empty, "survival curve of an empty cohort");
  std::vector<double> remaining(static_cast<std::size_t>(n_levels) + 1, 0.0);
  for (const auto& b : break_offs) {
    if (b.level < 0 || b.level > n_levels) {
      throw Error(ErrorCode::LevelOutOfRange, "break-off level " + std::to_string(b.level));
    }
    // A subject breaking off at level L is present at levels 0..L-1; an
    // obedient subject is present at every level.
    const int last_present = b.obedient ? n_levels : b.level - 1;
    for (int l = 0; l <= last_present; ++l) remaining[static_cast<std::size_t>(l)] += 1.0;
  }
  const double n = static_cast<double>(break_offs.size());
  for (double& r : remaining) r /= n;
  return remaining;
}

}  // namespace te::stats
