#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "rpreg/penalty.hpp"

namespace rpreg {

struct IfSetting {
  Eigen::VectorXd beta_star;
  double sigma_star = 1.0;
  double alpha = 0.0;
  Eigen::MatrixXd exx;  // E[X X'], symmetric positive definite
  PenaltySpec penalty;

  void validate() const;
};

// Expected Jacobian of the estimating function at (beta_star, sigma_star):
// alpha sigma^{-(2a+1)/(a+1)-1} blockdiag(E[XX'] / (a+1)^{3/2}, 2 / (a+1)^{5/2}).
// Throws AlphaZero at alpha = 0.
Eigen::MatrixXd j_alpha(const IfSetting& setting);

// Penalty slopes entering the IF: first[j] = p'(|b_j|) sign(b_j) and
// second[j] = p''(|b_j|) for the nonzero coordinates.
struct PenaltyTerms {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};
PenaltyTerms penalty_terms(const IfSetting& setting);

// IF rows for contamination at (x_t, y_t) with u = (y_t - x_t' beta_star) / sigma_star.
// Columns are (beta_1..beta_p, sigma). Coordinates with beta_star_j == 0 are
// identically 0; the remaining block is -(J*)^{-1} (psi + p'), J* = J + diag(p'', 0).
// At alpha = 0 the Gaussian likelihood limit is used. Throws SingularJ.
Eigen::MatrixXd if_curve(const IfSetting& setting, const Eigen::VectorXd& u_grid,
                         const Eigen::VectorXd& x_t);

// Same, with caller-supplied penalty slopes for every coordinate and no
// zero-coordinate truncation (used for smoothed penalties).
Eigen::MatrixXd if_curve_dense(const IfSetting& setting, const Eigen::VectorXd& u_grid,
                               const Eigen::VectorXd& x_t, const PenaltyTerms& terms);

struct BoundednessRow {
  double alpha = 0.0;
  double sup_norm = 0.0;      // sup of ||IF|| over u in [-u_max, u_max]
  double argmax_u = 0.0;
  std::vector<double> growth;  // sup over [-2U, 2U] / sup over [-U, U], U = u_max, 2 u_max, ...
  bool unbounded = false;      // every growth ratio exceeds 1.9
};

// Evaluates the IF for each alpha on the template's (beta, sigma, exx, penalty).
std::vector<BoundednessRow> boundedness_report(const std::vector<double>& alphas,
                                               const IfSetting& templ,
                                               const Eigen::VectorXd& x_t, double u_max = 50.0,
                                               double step = 0.01, int doublings = 3);

Eigen::VectorXd uniform_grid(double lo, double hi, double step);

// Long-format CSV: alpha,u,component,value with components beta1..betap, sigma.
void write_if_csv(std::ostream& out, double alpha, const Eigen::VectorXd& u_grid,
                  const Eigen::MatrixXd& curve, bool header = true);

}  // namespace rpreg
