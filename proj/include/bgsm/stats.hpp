#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bgsm/error.hpp"

namespace bgsm::stats {

/// Quantile of already-sorted values with linear interpolation between order
/// statistics: h = (N - 1) p, q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased (N - 1) sample variance.
inline double sample_variance(std::span<const double> v) {
  // shift by the first value so constant input gives exactly zero
  double shift = 0.0;
  for (double x : v) shift += x - v[0];
  const double m = v[0] + shift / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Split-chain potential scale reduction: the chain is cut into two halves of
/// length N (a middle draw is dropped when the length is odd) and
/// sqrt(((N - 1) / N W + B / N) / W) is returned, with W the mean within-half
/// variance and B = N times the variance of the two half means.
/// Returns 1 when both halves are constant and equal, infinity when constant but different.
inline double split_rhat(std::span<const double> v) {
  if (v.size() < 4) throw InputError("split R-hat needs at least 4 draws");
  const std::size_t half = v.size() / 2;
  const auto first = v.first(half);
  const auto second = v.last(half);
  const double w = 0.5 * (sample_variance(first) + sample_variance(second));
  const double m1 = mean(first), m2 = mean(second);
  const double n = static_cast<double>(half);
  const double b = n * 0.5 * (m1 - m2) * (m1 - m2);
  if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

inline double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

}  // namespace bgsm::stats
