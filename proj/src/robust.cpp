#include "jumpdiff/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jumpdiff {

double median(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  const auto mid_it = v.begin() + static_cast<std::ptrdiff_t>(mid);
  std::nth_element(v.begin(), mid_it, v.end());
  double med = *mid_it;
  if (v.size() % 2 == 0) {
    // lower middle is the largest element of the left partition
    med = 0.5 * (med + *std::max_element(v.begin(), mid_it));
  }
  return med;
}

double median_absolute_deviation(std::span<const double> values, double center) {
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [center](double x) { return std::abs(x - center); });
  return median(dev);
}

double mean(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

RobustSummary summarize(std::span<const double> values) {
  const double med = median(values);
  const double mad = values.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : median_absolute_deviation(values, med);
  return {med, mad, values.size()};
}

}  // namespace jumpdiff
