#include "rpreg/penalty.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "rpreg/errors.hpp"

namespace rpreg {

std::string_view to_string(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::L1: return "l1";
    case PenaltyFamily::SCAD: return "scad";
    case PenaltyFamily::MCP: return "mcp";
  }
  return "l1";
}

PenaltyFamily parse_penalty_family(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "l1" || lower == "lasso") return PenaltyFamily::L1;
  if (lower == "scad") return PenaltyFamily::SCAD;
  if (lower == "mcp") return PenaltyFamily::MCP;
  throw Error(ErrorCode::InvalidPenalty, "unknown penalty family '" + lower + "'");
}

double default_shape(PenaltyFamily family) {
  return family == PenaltyFamily::MCP ? kDefaultMcpA : kDefaultScadA;
}

PenaltySpec::PenaltySpec(PenaltyFamily family, double lambda, double a)
    : family_(family), lambda_(lambda), a_(a) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidPenalty, "lambda must be finite and non-negative");
  }
  if (family == PenaltyFamily::SCAD && !(a > 2.0)) {
    throw Error(ErrorCode::InvalidPenalty, "SCAD requires a > 2");
  }
  if (family == PenaltyFamily::MCP && !(a > 1.0)) {
    throw Error(ErrorCode::InvalidPenalty, "MCP requires a > 1");
  }
}

PenaltySpec::PenaltySpec(PenaltyFamily family, double lambda)
    : PenaltySpec(family, lambda, default_shape(family)) {}

double penalty_value(double s, const PenaltySpec& spec) {
  if (s < 0.0) throw Error(ErrorCode::NegativeArgument, "penalty argument must be >= 0");
  const double lam = spec.lambda();
  const double a = spec.a();
  switch (spec.family()) {
    case PenaltyFamily::L1:
      return lam * s;
    case PenaltyFamily::SCAD:
      if (s <= lam) return lam * s;
      if (s <= a * lam) return (2.0 * a * lam * s - s * s - lam * lam) / (2.0 * (a - 1.0));
      return 0.5 * (a + 1.0) * lam * lam;
    case PenaltyFamily::MCP:
      if (s <= a * lam) return lam * s - s * s / (2.0 * a);
      return 0.5 * a * lam * lam;
  }
  return 0.0;
}

double penalty_deriv(double s, const PenaltySpec& spec) {
  if (!(s > 0.0)) {
    throw Error(ErrorCode::NonPositiveArgument, "penalty derivative needs s > 0");
  }
  const double lam = spec.lambda();
  const double a = spec.a();
  switch (spec.family()) {
    case PenaltyFamily::L1:
      return lam;
    case PenaltyFamily::SCAD:
      if (s <= lam) return lam;
      if (s <= a * lam) return (a * lam - s) / (a - 1.0);
      return 0.0;
    case PenaltyFamily::MCP:
      if (s <= a * lam) return lam - s / a;
      return 0.0;
  }
  return 0.0;
}

double penalty_second_deriv(double s, const PenaltySpec& spec) {
  if (s < 0.0) throw Error(ErrorCode::NegativeArgument, "penalty argument must be >= 0");
  const double lam = spec.lambda();
  const double a = spec.a();
  switch (spec.family()) {
    case PenaltyFamily::L1:
      return 0.0;
    case PenaltyFamily::SCAD:
      if (s >= lam && s < a * lam) return -1.0 / (a - 1.0);
      return 0.0;
    case PenaltyFamily::MCP:
      if (s < a * lam) return -1.0 / a;
      return 0.0;
  }
  return 0.0;
}

double penalty_sum(const Eigen::VectorXd& beta, const PenaltySpec& spec) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) total += penalty_value(std::abs(beta[j]), spec);
  }
  return total;
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double univariate_min(double z, const PenaltySpec& spec) {
  const double lam = spec.lambda();
  const double a = spec.a();
  const double az = std::abs(z);
  switch (spec.family()) {
    case PenaltyFamily::L1:
      return soft_threshold(z, lam);
    case PenaltyFamily::MCP:
      if (az <= a * lam) return soft_threshold(z, lam) / (1.0 - 1.0 / a);
      return z;
    case PenaltyFamily::SCAD:
      if (az <= 2.0 * lam) return soft_threshold(z, lam);
      if (az <= a * lam) {
        return soft_threshold(z, a * lam / (a - 1.0)) / (1.0 - 1.0 / (a - 1.0));
      }
      return z;
  }
  return z;
}

namespace {

// One piece of p on [lo, hi]: p(b) = c2 b^2 + c1 b + c0.
struct Piece {
  double lo, hi, c2, c1, c0;
};

int penalty_pieces(const PenaltySpec& spec, std::array<Piece, 3>& out) {
  const double lam = spec.lambda();
  const double a = spec.a();
  const double inf = std::numeric_limits<double>::infinity();
  switch (spec.family()) {
    case PenaltyFamily::L1:
      out[0] = {0.0, inf, 0.0, lam, 0.0};
      return 1;
    case PenaltyFamily::MCP:
      out[0] = {0.0, a * lam, -0.5 / a, lam, 0.0};
      out[1] = {a * lam, inf, 0.0, 0.0, 0.5 * a * lam * lam};
      return 2;
    case PenaltyFamily::SCAD:
      out[0] = {0.0, lam, 0.0, lam, 0.0};
      out[1] = {lam, a * lam, -0.5 / (a - 1.0), a * lam / (a - 1.0),
                -0.5 * lam * lam / (a - 1.0)};
      out[2] = {a * lam, inf, 0.0, 0.0, 0.5 * (a + 1.0) * lam * lam};
      return 3;
  }
  return 0;
}

}  // namespace

double univariate_min_scaled(double z, const PenaltySpec& spec, double weight) {
  if (!(weight >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "penalty weight must be >= 0");
  }
  if (weight == 0.0 || spec.lambda() == 0.0) return z;
  if (std::isinf(weight)) return 0.0;
  if (spec.family() == PenaltyFamily::L1) return soft_threshold(z, weight * spec.lambda());

  // Solve for |z| on b >= 0 and restore the sign.
  const double az = std::abs(z);
  std::array<Piece, 3> pieces{};
  const int count = penalty_pieces(spec, pieces);

  auto objective = [&](double b) {
    return 0.5 * (b - az) * (b - az) + weight * penalty_value(b, spec);
  };

  double best_b = 0.0;
  double best_f = objective(0.0);
  auto consider = [&](double b) {
    if (!(b >= 0.0) || !std::isfinite(b)) return;
    const double f = objective(b);
    if (f < best_f) {
      best_f = f;
      best_b = b;
    }
  };

  for (int k = 0; k < count; ++k) {
    const Piece& pc = pieces[static_cast<std::size_t>(k)];
    const double curvature = 0.5 + weight * pc.c2;
    if (curvature > 0.0) {
      const double stationary = (az - weight * pc.c1) / (2.0 * curvature);
      consider(std::clamp(stationary, pc.lo, pc.hi));
    } else {
      consider(pc.lo);
      consider(pc.hi);
    }
  }
  return z < 0.0 ? -best_b : best_b;
}

double local_concavity(const Eigen::VectorXd& b, const PenaltySpec& spec) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0) {
      throw Error(ErrorCode::ZeroComponent, "local concavity needs nonzero components", j);
    }
    worst = std::max(worst, -penalty_second_deriv(std::abs(b[j]), spec));
  }
  return worst;
}

}  // namespace rpreg
