#include "rpreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rpreg/errors.hpp"
#include "rpreg/rp_loss.hpp"
#include "rpreg/stats.hpp"

namespace rpreg {

namespace {

constexpr double kSigmaFloor = 1e-10;

Eigen::VectorXd residuals_of(const Dataset& ds, const Eigen::VectorXd& beta, double intercept) {
  Eigen::VectorXd r = ds.y - ds.x * beta;
  r.array() -= intercept;
  return r;
}

double checked_sigma(double sigma_sq) {
  if (!(sigma_sq > kSigmaFloor * kSigmaFloor) || !std::isfinite(sigma_sq)) {
    throw Error(ErrorCode::DegenerateScale,
                "scale estimate collapsed below 1e-10");
  }
  return std::sqrt(sigma_sq);
}

// (alpha + 1) sum_i mu_i r_i^2 with normalised weights mu.
double weighted_sigma_sq(const Eigen::VectorXd& mu, const Eigen::VectorXd& residuals,
                         double alpha) {
  return (alpha + 1.0) * mu.dot(residuals.cwiseAbs2());
}

// Column second moments under the anchor weights and the weighted design used
// for the coordinate gradients.
struct SweepWorkspace {
  Eigen::VectorXd col_moment;  // sum_i mu_i x_ij^2
  Eigen::MatrixXd weighted_x;  // mu_i x_ij
  Eigen::VectorXd penalty_weight;

  SweepWorkspace(const Dataset& ds, const MmState& state, PenaltyScale scale, double c) {
    weighted_x = ds.x.array().colwise() * state.mu.array();
    col_moment = (weighted_x.array() * ds.x.array()).colwise().sum().transpose();
    const double k = scale == PenaltyScale::Objective ? state.curvature / c : 1.0;
    penalty_weight.resize(ds.p());
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      const double denom = k * col_moment[j];
      penalty_weight[j] =
          denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
    }
  }
};

void update_coordinate(MmState& state, const Dataset& ds, const PenaltySpec& spec,
                       const SweepWorkspace& ws, Eigen::Index j) {
  const double old = state.beta[j];
  double next = 0.0;
  if (ws.col_moment[j] > 0.0) {
    const double z = old + ws.weighted_x.col(j).dot(state.residuals) / ws.col_moment[j];
    next = univariate_min_scaled(z, spec, ws.penalty_weight[j]);
  }
  if (next != old) {
    state.residuals.noalias() -= (next - old) * ds.x.col(j);
    state.beta[j] = next;
  }
}

void shift_intercept(MmState& state) {
  const double shift = state.mu.dot(state.residuals);
  state.intercept += shift;
  state.residuals.array() -= shift;
}

// Coordinate descent on the surrogate until its relative change falls below
// eps_inner: full sweeps alternate with sweeps restricted to the active set.
int minimize_surrogate(MmState& state, const Dataset& ds, const PenaltySpec& spec,
                       const SolverConfig& config, PenaltyScale scale) {
  const double c = scale == PenaltyScale::Objective ? config.penalty_weight : 1.0;
  const SweepWorkspace ws(ds, state, scale, c);
  const Eigen::Index p = ds.p();
  auto converged = [&](double before, double after) {
    return std::abs(before - after) <= config.eps_inner * (std::abs(after) + 1.0);
  };

  int sweeps = 0;
  double current = surrogate_value(state, spec, scale, c);
  std::vector<Eigen::Index> active;
  active.reserve(static_cast<std::size_t>(p));

  while (sweeps < config.max_inner) {
    if (config.fit_intercept) shift_intercept(state);
    for (Eigen::Index j = 0; j < p; ++j) update_coordinate(state, ds, spec, ws, j);
    ++sweeps;
    double next = surrogate_value(state, spec, scale, c);
    if (converged(current, next)) break;
    current = next;

    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (state.beta[j] != 0.0) active.push_back(j);
    }
    while (sweeps < config.max_inner) {
      if (config.fit_intercept) shift_intercept(state);
      for (Eigen::Index j : active) update_coordinate(state, ds, spec, ws, j);
      ++sweeps;
      next = surrogate_value(state, spec, scale, c);
      const bool done = converged(current, next);
      current = next;
      if (done) break;
    }
  }
  return sweeps;
}

MmState initial_state(const Dataset& ds, const PenaltySpec& spec, const SolverConfig& config) {
  const Eigen::Index p = ds.p();
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double sigma = 0.0;
  switch (config.init.kind) {
    case Initialization::Kind::Zero: {
      beta = Eigen::VectorXd::Zero(p);
      if (config.fit_intercept) {
        const NullModel null = null_model(ds, config.alpha);
        intercept = null.intercept;
        sigma = null.sigma;
      } else {
        sigma = mad_sigma(ds.y);
        if (!(sigma > 0.0)) sigma = std::sqrt(ds.y.squaredNorm() / static_cast<double>(ds.n()));
      }
      break;
    }
    case Initialization::Kind::WarmStart:
    case Initialization::Kind::Custom:
      beta = config.init.beta;
      intercept = config.fit_intercept ? config.init.intercept : 0.0;
      sigma = config.init.sigma;
      break;
  }
  if (beta.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "initial beta length differs from p");
  }
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::DegenerateScale, "initial sigma must be positive");
  }
  return make_state(ds, std::move(beta), intercept, sigma, config.alpha, spec,
                    config.penalty_weight);
}

void reanchor(MmState& state, double alpha) {
  state.mu = mm_weights_residuals(state.residuals, state.sigma, alpha);
  state.curvature = majorizer_curvature(state.residuals, state.sigma, alpha);
}

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& beta) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) out.push_back(j);
  }
  return out;
}

}  // namespace

NullModel null_model(const Dataset& ds, double alpha, int max_iter, double tol) {
  if (ds.n() == 0) throw Error(ErrorCode::EmptyData, "no observations");
  RpParams{alpha}.validate();

  NullModel out;
  out.intercept = median(ds.y);
  Eigen::VectorXd r = ds.y.array() - out.intercept;
  out.sigma = mad_sigma(r);
  if (!(out.sigma > 0.0)) out.sigma = std::sqrt(r.squaredNorm() / static_cast<double>(ds.n()));
  if (!(out.sigma > 0.0)) throw Error(ErrorCode::DegenerateScale, "response is constant");

  for (int it = 0; it < max_iter; ++it) {
    out.mu = mm_weights_residuals(r, out.sigma, alpha);
    const double b0 = out.mu.dot(ds.y);
    r = ds.y.array() - b0;
    const double s = std::sqrt((alpha + 1.0) * out.mu.dot(r.cwiseAbs2()));
    if (!(s > 1e-10)) throw Error(ErrorCode::DegenerateScale, "null-model scale collapsed");
    const double change = std::max(std::abs(b0 - out.intercept), std::abs(s - out.sigma));
    out.intercept = b0;
    out.sigma = s;
    if (change <= tol * (1.0 + std::abs(b0) + s)) break;
  }
  out.mu = mm_weights_residuals(r, out.sigma, alpha);
  return out;
}

Initialization Initialization::zero() { return {}; }

Initialization Initialization::warm_start(const FitResult& previous) {
  Initialization init;
  init.kind = Kind::WarmStart;
  init.beta = previous.beta_std;
  init.intercept = previous.intercept_std;
  init.sigma = previous.sigma;
  return init;
}

Initialization Initialization::custom(Eigen::VectorXd beta, double sigma, double intercept) {
  Initialization init;
  init.kind = Kind::Custom;
  init.beta = std::move(beta);
  init.intercept = intercept;
  init.sigma = sigma;
  return init;
}

void SolverConfig::validate() const {
  RpParams{alpha}.validate();
  if (!(eps_outer > 0.0) || !(eps_inner > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
  }
  if (max_outer < 1 || max_inner < 1) {
    throw Error(ErrorCode::InvalidConfig, "iteration caps must be at least 1");
  }
  if (!(penalty_weight > 0.0) || !std::isfinite(penalty_weight)) {
    throw Error(ErrorCode::InvalidConfig, "penalty weight must be positive and finite");
  }
}

double objective(const Eigen::VectorXd& beta, double sigma, double intercept, const Dataset& ds,
                 double alpha, const PenaltySpec& spec, double penalty_weight) {
  return rp_loss(beta, sigma, ds, alpha, intercept) + penalty_weight * penalty_sum(beta, spec);
}

double majorizer_curvature(const Eigen::VectorXd& residuals, double sigma, double alpha) {
  if (alpha == 0.0) return 1.0 / (sigma * sigma);
  const double n = static_cast<double>(residuals.size());
  const double log_k = std::log(alpha) + log_weight_sum(residuals, sigma, alpha) - std::log(n) -
                       (alpha / (alpha + 1.0) + 2.0) * std::log(sigma);
  return std::exp(log_k);
}

MmState make_state(const Dataset& ds, Eigen::VectorXd beta, double intercept, double sigma,
                   double alpha, const PenaltySpec& spec, double penalty_weight) {
  MmState state;
  state.beta = std::move(beta);
  state.intercept = intercept;
  state.sigma = sigma;
  state.residuals = residuals_of(ds, state.beta, intercept);
  reanchor(state, alpha);
  state.objective =
      rp_loss_residuals(state.residuals, sigma, alpha) + penalty_weight * penalty_sum(state.beta, spec);
  return state;
}

double surrogate_value(const MmState& state, const PenaltySpec& spec, PenaltyScale scale,
                       double penalty_weight) {
  const bool objective_scale = scale == PenaltyScale::Objective;
  const double k = objective_scale ? state.curvature : 1.0;
  const double c = objective_scale ? penalty_weight : 1.0;
  return 0.5 * k * state.mu.dot(state.residuals.cwiseAbs2()) + c * penalty_sum(state.beta, spec);
}

MmState cd_sweep(MmState state, const Dataset& ds, const PenaltySpec& spec,
                 const SolverConfig& config, PenaltyScale scale) {
  const SweepWorkspace ws(ds, state, scale, config.penalty_weight);
  for (Eigen::Index j = 0; j < ds.p(); ++j) update_coordinate(state, ds, spec, ws, j);
  state.objective = rp_loss_residuals(state.residuals, state.sigma, config.alpha) +
                    config.penalty_weight * penalty_sum(state.beta, spec);
  return state;
}

double update_intercept(const MmState& state, const Dataset& ds) {
  const Eigen::VectorXd partial = ds.y - ds.x * state.beta;
  return state.mu.dot(partial);
}

double update_sigma(const Eigen::VectorXd& beta, double intercept, const MmState& prev_state,
                    const Dataset& ds, double alpha) {
  if (!(prev_state.sigma > 0.0)) {
    throw Error(ErrorCode::NonPositiveSigma, "previous sigma must be positive");
  }
  const Eigen::VectorXd prev_mu =
      mm_weights(prev_state.beta, prev_state.sigma, ds, alpha, prev_state.intercept);
  return checked_sigma(weighted_sigma_sq(prev_mu, residuals_of(ds, beta, intercept), alpha));
}

FitResult fit(const Dataset& ds, const PenaltySpec& spec, const SolverConfig& config) {
  config.validate();
  const double alpha = config.alpha;
  MmState state = initial_state(ds, spec, config);

  FitResult result;
  result.objective_trace.push_back(state.objective);

  try {
    for (int m = 1; m <= config.max_outer; ++m) {
      const double previous = state.objective;
      const double anchor_sigma = state.sigma;
      const Eigen::VectorXd anchor_mu = state.mu;

      minimize_surrogate(state, ds, spec, config, PenaltyScale::Objective);

      // Literal update with the anchor's weights; if it fails to lower Q, the
      // majoriser re-anchored at the new beta gives a guaranteed decrease.
      const double keep_loss = rp_loss_residuals(state.residuals, anchor_sigma, alpha);
      double sigma = checked_sigma(weighted_sigma_sq(anchor_mu, state.residuals, alpha));
      double loss = rp_loss_residuals(state.residuals, sigma, alpha);
      if (loss > keep_loss) {
        const Eigen::VectorXd mu_new = mm_weights_residuals(state.residuals, anchor_sigma, alpha);
        sigma = checked_sigma(weighted_sigma_sq(mu_new, state.residuals, alpha));
        loss = rp_loss_residuals(state.residuals, sigma, alpha);
        if (loss > keep_loss) {
          sigma = anchor_sigma;
          loss = keep_loss;
        }
      }
      state.sigma = sigma;
      state.objective = loss + config.penalty_weight * penalty_sum(state.beta, spec);
      reanchor(state, alpha);

      result.objective_trace.push_back(state.objective);
      result.n_iter = m;
      if (std::abs(state.objective - previous) <= config.eps_outer * (std::abs(previous) + 1.0)) {
        result.converged = true;
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateScale) throw;
    throw ScaleCollapse(e.what(), result.objective_trace);
  }

  const Coefficients original = back_transform(state.beta, state.intercept, ds);
  result.beta = original.beta;
  result.beta_std = state.beta;
  result.sigma = state.sigma;
  result.intercept = original.intercept;
  result.intercept_std = state.intercept;
  result.lambda = config.penalty_weight * spec.lambda();
  result.penalty_weight = config.penalty_weight;
  result.alpha = alpha;
  result.penalty = spec;
  result.active_set = support_of(state.beta);
  return result;
}

ScaleAdaptiveFit fit_residual_scale(const Dataset& ds, const PenaltySpec& spec,
                                    const SolverConfig& config) {
  config.validate();
  const double alpha = config.alpha;
  MmState state = initial_state(ds, spec, config);

  ScaleAdaptiveFit out;
  const double tol = std::sqrt(config.eps_outer) * 1e-2;
  for (int m = 1; m <= config.max_outer; ++m) {
    const Eigen::VectorXd prev_beta = state.beta;
    const double prev_intercept = state.intercept;
    const double prev_sigma = state.sigma;

    minimize_surrogate(state, ds, spec, config, PenaltyScale::Residual);
    state.sigma = checked_sigma(weighted_sigma_sq(state.mu, state.residuals, alpha));
    reanchor(state, alpha);

    out.n_iter = m;
    const double change =
        std::max({(state.beta - prev_beta).lpNorm<Eigen::Infinity>(),
                  std::abs(state.intercept - prev_intercept), std::abs(state.sigma - prev_sigma)});
    const double size = std::max({state.beta.lpNorm<Eigen::Infinity>(),
                                  std::abs(state.intercept), state.sigma});
    if (change <= tol * (1.0 + size)) {
      out.converged = true;
      break;
    }
  }
  out.beta_std = state.beta;
  out.intercept_std = state.intercept;
  out.sigma = state.sigma;
  out.lambda_objective = state.curvature * spec.lambda();
  return out;
}

FitResult fit_residual_units(const Dataset& ds, const PenaltySpec& spec,
                             const SolverConfig& config) {
  const ScaleAdaptiveFit pilot = fit_residual_scale(ds, spec, config);
  SolverConfig polish = config;
  polish.init = Initialization::custom(pilot.beta_std, pilot.sigma, pilot.intercept_std);
  polish.penalty_weight = spec.lambda() > 0.0 ? pilot.lambda_objective / spec.lambda() : 1.0;
  FitResult result = fit(ds, spec, polish);
  result.lambda_residual = spec.lambda();
  result.converged = result.converged && pilot.converged;
  return result;
}

KktReport kkt_check(const Dataset& ds, const Eigen::VectorXd& beta_std, double intercept_std,
                    double sigma, double alpha, const PenaltySpec& spec, double penalty_weight) {
  const Eigen::VectorXd r = residuals_of(ds, beta_std, intercept_std);
  const double n = static_cast<double>(ds.n());
  Eigen::VectorXd first(ds.n());
  double second = 0.0;
  double lead = 0.0;
  if (alpha == 0.0) {
    first = r / sigma;
    second = (r / sigma).squaredNorm() / n - 1.0;
    lead = 1.0 / sigma;
  } else {
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      const double u = r[i] / sigma;
      first[i] = phi1(u, alpha);
      second += phi2(u, alpha);
    }
    second /= n;
    lead = alpha * std::pow(sigma, -score_exponent(alpha));
  }
  const Eigen::VectorXd score = lead * (ds.x.transpose() * first) / n;

  KktReport report;
  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    const double b = beta_std[j];
    if (b != 0.0) {
      const double target =
          penalty_weight * penalty_deriv(std::abs(b), spec) * (b > 0.0 ? 1.0 : -1.0);
      report.active = std::max(report.active, std::abs(score[j] - target));
    } else {
      report.inactive =
          std::max(report.inactive, std::abs(score[j]) - penalty_weight * spec.lambda());
    }
  }
  report.inactive = std::max(report.inactive, 0.0);
  report.sigma = std::abs(second);
  report.intercept = std::abs(lead * first.sum() / n);
  return report;
}

}  // namespace rpreg
