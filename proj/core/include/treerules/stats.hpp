#pragma once

#include <cstddef>
#include <span>

namespace treerules {

/// Summary statistics of a sample. `std` is the sample standard deviation
/// (n - 1 denominator), defined as 0 for a single value. Quantiles use linear
/// interpolation between order statistics at position q * (n - 1).
struct Describe {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double max = 0.0;

  bool operator==(const Describe&) const = default;
};

/// Statistics of `values`; all fields NaN (count 0) for an empty sample.
Describe describe(std::span<const double> values);

/// Quantile of an ascending-sorted, non-empty sample.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace treerules
