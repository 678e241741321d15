#include "rpreg/dataset.hpp"

#include <cmath>
#include <string>

#include "rpreg/errors.hpp"

namespace rpreg {

Dataset standardize(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& raw_y) {
  const Eigen::Index n = raw_x.rows();
  const Eigen::Index p = raw_x.cols();
  if (raw_y.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "x has " + std::to_string(n) + " rows but y has " +
                    std::to_string(raw_y.size()) + " entries");
  }
  if (n < 2 || p < 1) {
    throw Error(ErrorCode::DimensionMismatch, "need n >= 2 and p >= 1");
  }

  Dataset ds;
  ds.x.resize(n, p);
  ds.column_means.resize(p);
  ds.column_scales.resize(p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = raw_x.col(j).sum() * inv_n;
    const double var =
        (raw_x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
    const double scale = std::sqrt(var);
    if (!(scale > 1e-12 * (1.0 + std::abs(mean)))) {
      throw Error(ErrorCode::ConstantColumn,
                  "column " + std::to_string(j) + " has zero variance", j);
    }
    ds.column_means[j] = mean;
    ds.column_scales[j] = scale;
    ds.x.col(j) = (raw_x.col(j).array() - mean) / scale;
  }
  ds.y_mean = raw_y.mean();
  ds.y = raw_y.array() - ds.y_mean;
  ds.standardized = true;
  return ds;
}

Dataset as_is(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (y.size() != x.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "x and y disagree in length");
  }
  Dataset ds;
  ds.x = x;
  ds.y = y;
  ds.column_means = Eigen::VectorXd::Zero(x.cols());
  ds.column_scales = Eigen::VectorXd::Ones(x.cols());
  ds.y_mean = 0.0;
  ds.standardized = false;
  return ds;
}

Coefficients back_transform(const Eigen::VectorXd& beta_std, double intercept_std,
                            const Dataset& ds) {
  if (beta_std.size() != ds.p()) {
    throw Error(ErrorCode::DimensionMismatch, "beta length differs from p");
  }
  Coefficients out;
  out.beta = beta_std.cwiseQuotient(ds.column_scales);
  out.intercept = ds.y_mean + intercept_std - ds.column_means.dot(out.beta);
  return out;
}

Eigen::VectorXd predict(const Eigen::MatrixXd& raw_x, const Coefficients& coef) {
  Eigen::VectorXd out = raw_x * coef.beta;
  out.array() += coef.intercept;
  return out;
}

}  // namespace rpreg
