#pragma once

#include <Eigen/Dense>

#include "rpreg/dataset.hpp"

namespace rpreg {

// Robustness tuning parameter of the Renyi-pseudodistance loss. alpha == 0 is
// the Gaussian negative log-likelihood; alpha > 0 downweights large residuals.
struct RpParams {
  double alpha = 0.0;
  void validate() const;
};

// u * exp(-alpha u^2 / 2); bounded by alpha^{-1/2} e^{-1/2}.
double phi1(double u, double alpha);
// (u^2 - 1/(alpha+1)) * exp(-alpha u^2 / 2).
double phi2(double u, double alpha);

// (2 alpha + 1) / (alpha + 1), the power of sigma^{-1} in the score.
inline double score_exponent(double alpha) { return (2.0 * alpha + 1.0) / (alpha + 1.0); }

// Empirical RP loss from raw residuals y_i - intercept - x_i' beta.
double rp_loss_residuals(const Eigen::VectorXd& residuals, double sigma, double alpha);
double rp_loss(const Eigen::VectorXd& beta, double sigma, const Dataset& ds, double alpha,
               double intercept = 0.0);

// Normalised weights mu_i proportional to exp(-(alpha/2) (r_i/sigma)^2),
// computed from log-weights with the maximum subtracted.
Eigen::VectorXd mm_weights_residuals(const Eigen::VectorXd& residuals, double sigma,
                                     double alpha);
Eigen::VectorXd mm_weights(const Eigen::VectorXd& beta, double sigma, const Dataset& ds,
                           double alpha, double intercept = 0.0);

// log sum_i exp(-(alpha/2) (r_i/sigma)^2), stable for extreme residuals.
double log_weight_sum(const Eigen::VectorXd& residuals, double sigma, double alpha);

// Gradient of the per-observation loss -sigma^{-alpha/(alpha+1)} exp(-(alpha/2) r^2)
// with respect to (beta, sigma): -alpha sigma^{-(2a+1)/(a+1)} (phi1(r) x, phi2(r)).
Eigen::VectorXd psi(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& beta,
                    double sigma, double alpha);

// The log form of the loss, (1/(alpha+1)) log sigma - (1/alpha) log mean_i exp(...),
// which is an increasing function of rp_loss at alpha > 0. The Jensen
// majoriser below bounds it from above.
double log_rp_criterion(const Eigen::VectorXd& residuals, double sigma, double alpha);

// h_MM(theta | anchor) - h_MM(anchor | anchor) for the Jensen majoriser of
// log_rp_criterion built at the anchor (residuals, sigma) with weights mu.
double mm_majorizer_gap(const Eigen::VectorXd& residuals, double sigma,
                        const Eigen::VectorXd& anchor_residuals, double anchor_sigma,
                        const Eigen::VectorXd& anchor_mu, double alpha);

}  // namespace rpreg
