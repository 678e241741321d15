#include "rpreg/stats.hpp"

#include <algorithm>

#include "rpreg/errors.hpp"

namespace rpreg {

double median(Eigen::VectorXd values) {
  const Eigen::Index n = values.size();
  if (n == 0) throw Error(ErrorCode::EmptyData, "median of an empty vector");
  double* begin = values.data();
  double* mid = begin + n / 2;
  std::nth_element(begin, mid, begin + n);
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(begin, mid);
  return 0.5 * (lower + upper);
}

double mad_sigma(const Eigen::VectorXd& values) {
  const double center = median(values);
  return 1.4826 * median((values.array() - center).abs().matrix());
}

}  // namespace rpreg
