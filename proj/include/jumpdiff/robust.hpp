#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jumpdiff {

// Median of a sample; even counts average the two middle values.
// Returns NaN for an empty sample.
double median(std::span<const double> values);

// Median absolute deviation about `center` (unscaled).
double median_absolute_deviation(std::span<const double> values, double center);

double mean(std::span<const double> values);

struct RobustSummary {
  double median;
  double mad;
  std::size_t count;  // number of defined values the median was taken over

  bool defined() const noexcept { return count > 0; }
};

RobustSummary summarize(std::span<const double> values);

}  // namespace jumpdiff
