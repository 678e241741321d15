#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpreg/dataset.hpp"
#include "rpreg/penalty.hpp"
#include "rpreg/solver.hpp"

namespace rpreg {

// Geometric grid from lambda_max down to ratio * lambda_max, where
// lambda_max = max_j |sum_i mu_i x_ij (y_i - b0)| under the null model's
// weights, widened by a relative 1e-12 so rounding cannot activate a
// coefficient at the first point. The grid is in residual units (see
// PenaltyScale::Residual).
std::vector<double> lambda_grid(const Dataset& ds, double alpha, int k = 50, double ratio = 0.01);

// log(sigma^2) + log(log n) log(p) / n * df.
double hbic(double sigma, Eigen::Index df, Eigen::Index n, Eigen::Index p);
double hbic(const FitResult& fit, Eigen::Index n, Eigen::Index p);

struct PathFailure {
  std::size_t index = 0;
  std::string message;
};

struct PathResult {
  std::vector<double> lambdas;                  // residual units, decreasing
  std::vector<std::optional<FitResult>> fits;  // empty where the solver failed
  std::vector<double> hbic;                     // NaN where the solver failed
  std::size_t selected_index = 0;
  std::vector<PathFailure> failures;

  const FitResult& selected() const { return *fits.at(selected_index); }
};

// Walks the grid from the largest lambda down, each point a fit_residual_units
// call warm-started from the previous point.
// Selection minimises HBIC; ties go to the larger lambda.
PathResult fit_path(const Dataset& ds, double alpha, PenaltyFamily family,
                    const std::vector<double>& grid, const SolverConfig& config,
                    std::optional<double> shape = std::nullopt);

}  // namespace rpreg
