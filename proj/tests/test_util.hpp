#ifndef CFPOISON_TESTS_TEST_UTIL_HPP_
#define CFPOISON_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace cfpoison::testutil {

inline double rel_l2_error(const std::vector<double>& got, const std::vector<double>& want) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t e = 0; e < got.size(); ++e) {
    num += (got[e] - want[e]) * (got[e] - want[e]);
    den += want[e] * want[e];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace cfpoison::testutil

#endif  // CFPOISON_TESTS_TEST_UTIL_HPP_
