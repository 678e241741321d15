#pragma once

#include <Eigen/Dense>

namespace rpreg {

double median(Eigen::VectorXd values);

// 1.4826 * median(|v - median(v)|), the normal-consistent MAD.
double mad_sigma(const Eigen::VectorXd& values);

}  // namespace rpreg
