#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rpreg/dataset.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/penalty.hpp"

namespace rpreg {

struct FitResult;

// How lambda enters the coordinate-descent subproblem.
//
// Objective: lambda is the penalty level of Q = L_n^alpha + c sum_j p_lambda(|beta_j|)
// (c = SolverConfig::penalty_weight, normally 1) and the weighted least-squares
// majoriser carries the curvature
// K = alpha sigma^{-alpha/(alpha+1)-2} sum_i w_i / n (K = 1/sigma^2 at alpha = 0),
// so every MM step decreases Q.
//
// Residual: lambda is measured against (1/2) sum_i mu_i r_i^2, i.e. in units of
// the weighted residuals. The penalty level then does not drift with sigma,
// which is what a lambda path needs; a fixed point is stationary for Q with
// c = K at that point.
enum class PenaltyScale { Objective, Residual };

struct Initialization {
  enum class Kind { Zero, WarmStart, Custom };

  Kind kind = Kind::Zero;
  Eigen::VectorXd beta;    // standardized scale
  double intercept = 0.0;  // on the centred response
  double sigma = 0.0;

  // beta = 0 with the intercept and sigma of null_model.
  static Initialization zero();
  static Initialization warm_start(const FitResult& previous);
  static Initialization custom(Eigen::VectorXd beta, double sigma, double intercept = 0.0);
};

// Intercept-plus-scale fit with beta = 0: alternates the weighted mean and the
// scale update until both settle. At alpha = 0 this is (mean, RMS).
struct NullModel {
  double intercept = 0.0;
  double sigma = 0.0;
  Eigen::VectorXd mu;
};
NullModel null_model(const Dataset& ds, double alpha, int max_iter = 500, double tol = 1e-12);

struct SolverConfig {
  double alpha = 0.0;
  double eps_outer = 1e-8;  // relative to |Q| + 1
  double eps_inner = 1e-8;  // relative to |surrogate| + 1
  int max_outer = 500;
  int max_inner = 1000;
  Initialization init;
  bool fit_intercept = true;
  double penalty_weight = 1.0;  // c in Q = L + c sum_j p_lambda(|beta_j|)

  void validate() const;
};

// Current MM iterate. `mu` and `curvature` describe the majoriser anchored at
// the start of the outer iteration; residuals always equal y - intercept - x beta.
struct MmState {
  Eigen::VectorXd beta;
  double sigma = 1.0;
  double intercept = 0.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd residuals;
  double curvature = 1.0;
  double objective = 0.0;
};

struct FitResult {
  Eigen::VectorXd beta;      // original scale
  Eigen::VectorXd beta_std;  // standardized scale
  double sigma = 0.0;
  double intercept = 0.0;  // original scale
  double intercept_std = 0.0;
  double lambda = 0.0;  // penalty level of Q
  double penalty_weight = 1.0;
  std::optional<double> lambda_residual;  // residual-unit value when fitted through one
  double alpha = 0.0;
  PenaltySpec penalty;
  std::vector<double> objective_trace;
  bool converged = false;
  int n_iter = 0;
  std::vector<Eigen::Index> active_set;

  double objective() const { return objective_trace.back(); }
  Eigen::Index df() const { return static_cast<Eigen::Index>(active_set.size()); }
};

// Q(beta, sigma) with the intercept left unpenalised.
double objective(const Eigen::VectorXd& beta, double sigma, double intercept, const Dataset& ds,
                 double alpha, const PenaltySpec& spec, double penalty_weight = 1.0);

// Builds a state anchored at (beta, intercept, sigma).
MmState make_state(const Dataset& ds, Eigen::VectorXd beta, double intercept, double sigma,
                   double alpha, const PenaltySpec& spec, double penalty_weight = 1.0);

// Curvature K of the weighted least-squares majoriser at (residuals, sigma).
double majorizer_curvature(const Eigen::VectorXd& residuals, double sigma, double alpha);

// Value of the weighted penalised least-squares surrogate minimised by the
// inner loop: (K/2) sum_i mu_i r_i^2 + c sum_j p(|beta_j|), with K = c = 1 under
// PenaltyScale::Residual.
double surrogate_value(const MmState& state, const PenaltySpec& spec, PenaltyScale scale,
                       double penalty_weight = 1.0);

// One cyclic pass j = 1..p of coordinate descent on the surrogate.
MmState cd_sweep(MmState state, const Dataset& ds, const PenaltySpec& spec,
                 const SolverConfig& config, PenaltyScale scale = PenaltyScale::Objective);

// sum_i mu_i (y_i - x_i' beta): the surrogate's minimiser over the intercept.
double update_intercept(const MmState& state, const Dataset& ds);

// sigma^2 = (alpha + 1) sum_i w_i r_i^2 / sum_i w_i with weights from the
// previous iterate and residuals from the new (beta, intercept).
double update_sigma(const Eigen::VectorXd& beta, double intercept, const MmState& prev_state,
                    const Dataset& ds, double alpha);

// DegenerateScale raised by fit(), with the objective values reached before
// the scale hit the floor.
class ScaleCollapse : public Error {
 public:
  ScaleCollapse(const std::string& message, std::vector<double> trace)
      : Error(ErrorCode::DegenerateScale, message), trace_(std::move(trace)) {}

  const std::vector<double>& objective_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

// Minimises Q for fixed lambda by MM with inner coordinate descent. Soft
// non-convergence is reported through FitResult::converged; a collapsed scale
// throws ScaleCollapse.
FitResult fit(const Dataset& ds, const PenaltySpec& spec, const SolverConfig& config);

struct ScaleAdaptiveFit {
  Eigen::VectorXd beta_std;
  double intercept_std = 0.0;
  double sigma = 0.0;
  double lambda_objective = 0.0;  // K * lambda at the fixed point
  int n_iter = 0;
  bool converged = false;
};

// Same iteration with PenaltyScale::Residual; `spec.lambda()` is in residual units.
ScaleAdaptiveFit fit_residual_scale(const Dataset& ds, const PenaltySpec& spec,
                                    const SolverConfig& config);

// Residual-unit fit: fit_residual_scale, then fit() on Q with penalty_weight
// equal to the curvature at the pilot's fixed point (a stationary point of that Q),
// so the returned trace is monotone. FitResult::lambda is the L1-equivalent
// objective level c * lambda.
FitResult fit_residual_units(const Dataset& ds, const PenaltySpec& spec,
                             const SolverConfig& config);

// Stationarity residuals of Q at a fit.
struct KktReport {
  double active = 0.0;    // max_j |score_j - c p'(|beta_j|) sign(beta_j)| over the active set
  double inactive = 0.0;  // max_j max(0, |score_j| - c lambda) over zero coefficients
  double sigma = 0.0;     // |(1/n) sum_i phi2(r_i/sigma)| (mean squared standardized residual - 1 at alpha = 0)
  double intercept = 0.0;
};
// score_j is -dL/dbeta_j: alpha sigma^{-(2a+1)/(a+1)} (1/n) sum_i phi1(r_i/sigma) x_ij,
// or (1/(n sigma^2)) sum_i r_i x_ij at alpha = 0.
KktReport kkt_check(const Dataset& ds, const Eigen::VectorXd& beta_std, double intercept_std,
                    double sigma, double alpha, const PenaltySpec& spec,
                    double penalty_weight = 1.0);

}  // namespace rpreg
