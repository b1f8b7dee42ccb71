#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace mvreg::detail {

double median(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_absolute_deviation(std::span<const double> values) {
  const double m = median(values);
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [m](double x) { return std::abs(x - m); });
  return median(dev);
}

}  // namespace mvreg::detail
