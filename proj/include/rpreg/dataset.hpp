#pragma once

#include <Eigen/Dense>

namespace rpreg {

// Design matrix and response on the scale the solver works with: every column
// of x has zero mean and unit sample standard deviation and y is centred. The metadata maps coefficients back to
// the caller's scale.
//
// Immutable once built; concurrent fits may share one instance.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  double y_mean = 0.0;
  bool standardized = false;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

struct Coefficients {
  Eigen::VectorXd beta;
  double intercept = 0.0;
};

// Throws ConstantColumn (with the column index) or DimensionMismatch.
Dataset standardize(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& raw_y);

// Wraps data that must not be rescaled (identity metadata, standardized=false).
// Used by the brute-force oracles that need the objective on a fixed scale.
Dataset as_is(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Maps (beta_std, intercept_std) fitted on `ds` to the original scale so that
// intercept + x_raw' beta equals the standardized-scale prediction.
Coefficients back_transform(const Eigen::VectorXd& beta_std, double intercept_std,
                            const Dataset& ds);

// Original-scale prediction for raw covariates.
Eigen::VectorXd predict(const Eigen::MatrixXd& raw_x, const Coefficients& coef);

}  // namespace rpreg
