#include <algorithm>
#include <cmath>
#include <numeric>

#include "spd/distribution.hpp"
#include "spd/errors.hpp"

namespace spd {

namespace {

// Type-7 sample quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("bandwidth of an empty sample");
  // Sorted first so the result depends only on the multiset of prices.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  const double fallback = std::max(0.01 * mean, 0.01);
  if (samples.size() < 2) return fallback;

  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);

  // Use the smaller spread measure, ignoring one that collapsed to zero on ties.
  double spread = 0.0;
  for (double s : {sd, iqr / 1.34}) {
    if (s > 0.0 && (spread == 0.0 || s < spread)) spread = s;
  }
  if (!(spread > 0.0)) return fallback;
  return 0.9 * spread * std::pow(n, -0.2);
}

Density fit_kde(std::span<const double> samples, std::optional<double> bandwidth) {
  if (samples.empty()) throw ValidationError("kernel density needs at least one price");
  if (bandwidth && !(*bandwidth > 0.0)) {
    throw ValidationError("bandwidth must be positive, got " + std::to_string(*bandwidth));
  }
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  return Density::kernel(samples, h);
}

Density fit_kde(const PriceList& prices, std::optional<double> bandwidth) {
  const auto values = prices.dollars();
  return fit_kde(std::span<const double>(values), bandwidth);
}

}  // namespace spd
