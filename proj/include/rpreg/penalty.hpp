#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace rpreg {

enum class PenaltyFamily { L1, SCAD, MCP };

inline constexpr double kDefaultScadA = 3.7;
inline constexpr double kDefaultMcpA = 3.0;

std::string_view to_string(PenaltyFamily family);
// Accepts "l1"/"lasso", "scad", "mcp" (case-insensitive).
PenaltyFamily parse_penalty_family(std::string_view text);
double default_shape(PenaltyFamily family);

// Penalty p_lambda(|s|). The shape parameter must satisfy a > 2 for SCAD and
// a > 1 for MCP; it is ignored for L1.
class PenaltySpec {
 public:
  PenaltySpec() = default;
  PenaltySpec(PenaltyFamily family, double lambda, double a);
  PenaltySpec(PenaltyFamily family, double lambda);

  PenaltyFamily family() const { return family_; }
  double lambda() const { return lambda_; }
  double a() const { return a_; }

  PenaltySpec with_lambda(double lambda) const { return {family_, lambda, a_}; }

 private:
  PenaltyFamily family_ = PenaltyFamily::L1;
  double lambda_ = 0.0;
  double a_ = kDefaultScadA;
};

double penalty_value(double s, const PenaltySpec& spec);
double penalty_deriv(double s, const PenaltySpec& spec);
// Piecewise second derivative; kinks take the right limit.
double penalty_second_deriv(double s, const PenaltySpec& spec);
double penalty_sum(const Eigen::VectorXd& beta, const PenaltySpec& spec);

double soft_threshold(double z, double lambda);

// argmin_b (1/2)(z - b)^2 + p_lambda(|b|), using the closed forms.
double univariate_min(double z, const PenaltySpec& spec);

// argmin_b (1/2)(z - b)^2 + weight * p_lambda(|b|) for any weight >= 0. The
// scaled problem may be nonconvex (weight large relative to the shape), so the
// minimum is taken over the stationary points of each quadratic piece.
double univariate_min_scaled(double z, const PenaltySpec& spec, double weight);

// max_j -p''(|b_j|) over the components of b; every component must be nonzero.
double local_concavity(const Eigen::VectorXd& b, const PenaltySpec& spec);

}  // namespace rpreg
