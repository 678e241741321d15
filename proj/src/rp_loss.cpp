#include "rpreg/rp_loss.hpp"

#include <cmath>
#include <numbers>

#include "rpreg/errors.hpp"

namespace rpreg {

namespace {

void require_positive_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive and finite");
  }
}

}  // namespace

void RpParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidConfig, "alpha must be a finite non-negative number");
  }
}

double phi1(double u, double alpha) { return u * std::exp(-0.5 * alpha * u * u); }

double phi2(double u, double alpha) {
  return (u * u - 1.0 / (alpha + 1.0)) * std::exp(-0.5 * alpha * u * u);
}

double rp_loss_residuals(const Eigen::VectorXd& residuals, double sigma, double alpha) {
  require_positive_sigma(sigma);
  RpParams{alpha}.validate();
  const double n = static_cast<double>(residuals.size());
  if (alpha == 0.0) {
    const double ss = residuals.squaredNorm() / (sigma * sigma);
    return std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) + 0.5 * ss / n;
  }
  const double scale = -0.5 * alpha / (sigma * sigma);
  const double total = (residuals.array().square() * scale).exp().sum();
  return -std::pow(sigma, -alpha / (alpha + 1.0)) * total / n;
}

double rp_loss(const Eigen::VectorXd& beta, double sigma, const Dataset& ds, double alpha,
               double intercept) {
  Eigen::VectorXd r = ds.y - ds.x * beta;
  r.array() -= intercept;
  return rp_loss_residuals(r, sigma, alpha);
}

Eigen::VectorXd mm_weights_residuals(const Eigen::VectorXd& residuals, double sigma,
                                     double alpha) {
  require_positive_sigma(sigma);
  const Eigen::Index n = residuals.size();
  if (n == 0) throw Error(ErrorCode::EmptyData, "no observations");
  if (alpha == 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  Eigen::ArrayXd logw = residuals.array().square() * (-0.5 * alpha / (sigma * sigma));
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) {
    throw Error(ErrorCode::DegenerateWeights, "non-finite residuals");
  }
  Eigen::VectorXd w = (logw - top).exp().matrix();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::DegenerateWeights, "weights underflowed");
  }
  return w / total;
}

Eigen::VectorXd mm_weights(const Eigen::VectorXd& beta, double sigma, const Dataset& ds,
                           double alpha, double intercept) {
  Eigen::VectorXd r = ds.y - ds.x * beta;
  r.array() -= intercept;
  return mm_weights_residuals(r, sigma, alpha);
}

double log_weight_sum(const Eigen::VectorXd& residuals, double sigma, double alpha) {
  require_positive_sigma(sigma);
  if (alpha == 0.0) return std::log(static_cast<double>(residuals.size()));
  Eigen::ArrayXd logw = residuals.array().square() * (-0.5 * alpha / (sigma * sigma));
  const double top = logw.maxCoeff();
  return top + std::log((logw - top).exp().sum());
}

Eigen::VectorXd psi(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& beta,
                    double sigma, double alpha) {
  require_positive_sigma(sigma);
  if (x.size() != beta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "x and beta disagree in length");
  }
  const double r = (y - x.dot(beta)) / sigma;
  const double lead = -alpha * std::pow(sigma, -score_exponent(alpha));
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = lead * phi1(r, alpha) * x;
  out[x.size()] = lead * phi2(r, alpha);
  return out;
}

double log_rp_criterion(const Eigen::VectorXd& residuals, double sigma, double alpha) {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::DomainError, "the log form is defined for alpha > 0");
  }
  const double n = static_cast<double>(residuals.size());
  return std::log(sigma) / (alpha + 1.0) -
         (log_weight_sum(residuals, sigma, alpha) - std::log(n)) / alpha;
}

double mm_majorizer_gap(const Eigen::VectorXd& residuals, double sigma,
                        const Eigen::VectorXd& anchor_residuals, double anchor_sigma,
                        const Eigen::VectorXd& anchor_mu, double alpha) {
  require_positive_sigma(sigma);
  require_positive_sigma(anchor_sigma);
  const double quad_new =
      0.5 * anchor_mu.dot(residuals.cwiseAbs2()) / (sigma * sigma);
  const double quad_old =
      0.5 * anchor_mu.dot(anchor_residuals.cwiseAbs2()) / (anchor_sigma * anchor_sigma);
  return std::log(sigma / anchor_sigma) / (alpha + 1.0) + quad_new - quad_old;
}

}  // namespace rpreg
