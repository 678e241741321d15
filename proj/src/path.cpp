#include "rpreg/path.hpp"

#include <cmath>
#include <limits>

#include "rpreg/errors.hpp"
#include "rpreg/rp_loss.hpp"
#include "rpreg/stats.hpp"

namespace rpreg {

std::vector<double> lambda_grid(const Dataset& ds, double alpha, int k, double ratio) {
  if (ds.n() == 0 || ds.p() == 0) throw Error(ErrorCode::EmptyData, "empty dataset");
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "grid ratio must lie in (0, 1)");
  }
  const NullModel null = null_model(ds, alpha);
  const Eigen::VectorXd wr = null.mu.cwiseProduct(ds.y.array().matrix() -
                                                  Eigen::VectorXd::Constant(ds.n(), null.intercept));
  const double lambda_max = (ds.x.transpose() * wr).lpNorm<Eigen::Infinity>() * (1.0 + 1e-12);
  if (!(lambda_max > 0.0)) {
    throw Error(ErrorCode::DegenerateScale, "no predictor is correlated with the response");
  }
  std::vector<double> grid(static_cast<std::size_t>(k));
  const double step = std::log(ratio) / static_cast<double>(k - 1);
  for (int i = 0; i < k; ++i) grid[static_cast<std::size_t>(i)] = lambda_max * std::exp(step * i);
  grid.back() = lambda_max * ratio;
  return grid;
}

double hbic(double sigma, Eigen::Index df, Eigen::Index n, Eigen::Index p) {
  if (n < 3 || p < 2) throw Error(ErrorCode::DomainError, "HBIC needs n >= 3 and p >= 2");
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive");
  const double nn = static_cast<double>(n);
  return std::log(sigma * sigma) +
         std::log(std::log(nn)) * std::log(static_cast<double>(p)) / nn * static_cast<double>(df);
}

double hbic(const FitResult& fit, Eigen::Index n, Eigen::Index p) {
  return hbic(fit.sigma, fit.df(), n, p);
}

PathResult fit_path(const Dataset& ds, double alpha, PenaltyFamily family,
                    const std::vector<double>& grid, const SolverConfig& config,
                    std::optional<double> shape) {
  if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty lambda grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] < grid[k - 1])) {
      throw Error(ErrorCode::InvalidConfig, "lambda grid must be strictly decreasing");
    }
  }
  const double a = shape.value_or(default_shape(family));

  PathResult out;
  out.lambdas = grid;
  out.fits.resize(grid.size());
  out.hbic.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());

  SolverConfig step = config;
  step.alpha = alpha;
  step.init = Initialization::zero();
  std::optional<std::size_t> best;

  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      FitResult result = fit_residual_units(ds, PenaltySpec(family, grid[k], a), step);
      out.hbic[k] = hbic(result, ds.n(), ds.p());
      if (!best || out.hbic[k] < out.hbic[*best]) best = k;
      step.init = Initialization::warm_start(result);
      out.fits[k] = std::move(result);
    } catch (const Error& e) {
      out.failures.push_back({k, e.what()});
      step.init = Initialization::zero();
    }
  }
  if (!best) throw Error(ErrorCode::DegenerateScale, "every lambda on the grid failed");
  out.selected_index = *best;
  return out;
}

}  // namespace rpreg
