#include "treerules/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace treerules {

double quantile_sorted(std::span<const double> sorted, double q) {
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(lower);
  return sorted[lower] + fraction * (sorted[upper] - sorted[lower]);
}

Describe describe(std::span<const double> values) {
  Describe d;
  d.count = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    d.mean = d.std = d.min = d.q25 = d.q50 = d.q75 = d.max = nan;
    return d;
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  d.min = sorted.front();
  d.max = sorted.back();
  d.q25 = quantile_sorted(sorted, 0.25);
  d.q50 = quantile_sorted(sorted, 0.50);
  d.q75 = quantile_sorted(sorted, 0.75);

  // A constant sample has exactly that mean and zero spread; summation
  // rounding would otherwise leak a residue into both.
  if (d.min == d.max) {
    d.mean = d.min;
    return d;
  }

  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());

  if (values.size() > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - d.mean) * (v - d.mean);
    d.std = std::sqrt(squares / static_cast<double>(values.size() - 1));
  }
  return d;
}

}  // namespace treerules
