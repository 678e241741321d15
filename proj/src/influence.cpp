#include "rpreg/influence.hpp"

#include <cmath>
#include <string>

#include "rpreg/csv.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/rp_loss.hpp"

namespace rpreg {

namespace {

// Expected Jacobian and the per-point score at u, up to the same positive
// factor, for the full (p+1)-dimensional parameter.
struct Kernel {
  Eigen::MatrixXd jacobian;
  double score_scale = 0.0;  // score = -score_scale (phi1(u) x, phi2(u))
  double alpha = 0.0;

  double first(double u) const { return alpha == 0.0 ? u : phi1(u, alpha); }
  double second(double u) const { return alpha == 0.0 ? u * u - 1.0 : phi2(u, alpha); }
};

Kernel make_kernel(const IfSetting& s) {
  Kernel k;
  k.alpha = s.alpha;
  const Eigen::Index p = s.beta_star.size();
  if (s.alpha == 0.0) {
    // Gaussian negative log-likelihood: E Hessian = sigma^-2 blockdiag(E[XX'], 2).
    const double inv2 = 1.0 / (s.sigma_star * s.sigma_star);
    k.jacobian = Eigen::MatrixXd::Zero(p + 1, p + 1);
    k.jacobian.topLeftCorner(p, p) = inv2 * s.exx;
    k.jacobian(p, p) = 2.0 * inv2;
    k.score_scale = 1.0 / s.sigma_star;
  } else {
    k.jacobian = j_alpha(s);
    k.score_scale = s.alpha * std::pow(s.sigma_star, -score_exponent(s.alpha));
  }
  return k;
}

void append_double(std::string& line, double v) { line += format_double(v); }

}  // namespace

void IfSetting::validate() const {
  RpParams{alpha}.validate();
  const Eigen::Index p = beta_star.size();
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "beta_star is empty");
  if (!(sigma_star > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma_star must be positive");
  if (exx.rows() != p || exx.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "E[XX'] must be p x p");
  }
  if ((exx - exx.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::DomainError, "E[XX'] is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(exx, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorCode::DomainError, "E[XX'] is not positive definite");
  }
}

Eigen::MatrixXd j_alpha(const IfSetting& setting) {
  if (setting.alpha == 0.0) {
    throw Error(ErrorCode::AlphaZero, "the closed-form J requires alpha > 0");
  }
  setting.validate();
  const double a = setting.alpha;
  const Eigen::Index p = setting.beta_star.size();
  const double lead = a * std::pow(setting.sigma_star, -score_exponent(a) - 1.0);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(p + 1, p + 1);
  j.topLeftCorner(p, p) = lead / std::pow(a + 1.0, 1.5) * setting.exx;
  j(p, p) = lead * 2.0 / std::pow(a + 1.0, 2.5);
  return j;
}

PenaltyTerms penalty_terms(const IfSetting& setting) {
  const Eigen::Index p = setting.beta_star.size();
  PenaltyTerms t{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = setting.beta_star[j];
    if (b == 0.0) continue;
    const double s = std::abs(b);
    t.first[j] = penalty_deriv(s, setting.penalty) * (b > 0.0 ? 1.0 : -1.0);
    t.second[j] = penalty_second_deriv(s, setting.penalty);
  }
  return t;
}

Eigen::MatrixXd if_curve_dense(const IfSetting& setting, const Eigen::VectorXd& u_grid,
                               const Eigen::VectorXd& x_t, const PenaltyTerms& terms) {
  setting.validate();
  const Eigen::Index p = setting.beta_star.size();
  if (x_t.size() != p || terms.first.size() != p || terms.second.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "x_t and penalty terms must have length p");
  }
  const Kernel k = make_kernel(setting);
  Eigen::MatrixXd jstar = k.jacobian;
  jstar.topLeftCorner(p, p).diagonal() += terms.second;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(jstar);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::SingularJ,
                "J* is singular (reciprocal condition " + std::to_string(lu.rcond()) + ")");
  }

  Eigen::MatrixXd out(u_grid.size(), p + 1);
  Eigen::VectorXd score(p + 1);
  for (Eigen::Index i = 0; i < u_grid.size(); ++i) {
    const double u = u_grid[i];
    score.head(p) = -k.score_scale * k.first(u) * x_t + terms.first;
    score[p] = -k.score_scale * k.second(u);
    out.row(i) = -lu.solve(score).transpose();
  }
  return out;
}

Eigen::MatrixXd if_curve(const IfSetting& setting, const Eigen::VectorXd& u_grid,
                         const Eigen::VectorXd& x_t) {
  setting.validate();
  const Eigen::Index p = setting.beta_star.size();
  if (x_t.size() != p) throw Error(ErrorCode::DimensionMismatch, "x_t must have length p");

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (setting.beta_star[j] != 0.0) active.push_back(j);
  }
  const auto q = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u_grid.size(), p + 1);
  const PenaltyTerms full = penalty_terms(setting);

  // Sub-problem on the nonzero coordinates plus sigma.
  IfSetting sub = setting;
  sub.beta_star.resize(q);
  sub.exx.resize(q, q);
  Eigen::VectorXd sub_x(q);
  PenaltyTerms terms{Eigen::VectorXd(q), Eigen::VectorXd(q)};
  for (Eigen::Index a = 0; a < q; ++a) {
    sub.beta_star[a] = setting.beta_star[active[static_cast<std::size_t>(a)]];
    sub_x[a] = x_t[active[static_cast<std::size_t>(a)]];
    terms.first[a] = full.first[active[static_cast<std::size_t>(a)]];
    terms.second[a] = full.second[active[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < q; ++b) {
      sub.exx(a, b) =
          setting.exx(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
    }
  }
  if (q == 0) {
    const Kernel k = make_kernel(setting);
    const double jss = k.jacobian(p, p);
    for (Eigen::Index i = 0; i < u_grid.size(); ++i) {
      out(i, p) = k.score_scale * k.second(u_grid[i]) / jss;
    }
    return out;
  }
  const Eigen::MatrixXd part = if_curve_dense(sub, u_grid, sub_x, terms);
  for (Eigen::Index a = 0; a < q; ++a) out.col(active[static_cast<std::size_t>(a)]) = part.col(a);
  out.col(p) = part.col(q);
  return out;
}

Eigen::VectorXd uniform_grid(double lo, double hi, double step) {
  if (!(hi >= lo) || !(step > 0.0)) throw Error(ErrorCode::InvalidConfig, "invalid u grid");
  const auto count = static_cast<Eigen::Index>(std::llround((hi - lo) / step)) + 1;
  Eigen::VectorXd g(count);
  for (Eigen::Index i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
  g[count - 1] = hi;
  return g;
}

std::vector<BoundednessRow> boundedness_report(const std::vector<double>& alphas,
                                               const IfSetting& templ,
                                               const Eigen::VectorXd& x_t, double u_max,
                                               double step, int doublings) {
  std::vector<BoundednessRow> rows;
  for (double alpha : alphas) {
    IfSetting s = templ;
    s.alpha = alpha;
    BoundednessRow row;
    row.alpha = alpha;

    auto sup_over = [&](double bound, double* where) {
      const Eigen::VectorXd grid = uniform_grid(-bound, bound, step);
      const Eigen::VectorXd norms = if_curve(s, grid, x_t).rowwise().norm();
      Eigen::Index idx = 0;
      const double top = norms.maxCoeff(&idx);
      if (where != nullptr) *where = grid[idx];
      return top;
    };

    row.sup_norm = sup_over(u_max, &row.argmax_u);
    double previous = row.sup_norm;
    double bound = u_max;
    row.unbounded = doublings > 0;
    for (int d = 0; d < doublings; ++d) {
      bound *= 2.0;
      const double next = sup_over(bound, nullptr);
      const double ratio = previous > 0.0 ? next / previous : 1.0;
      row.growth.push_back(ratio);
      row.unbounded = row.unbounded && ratio > 1.9;
      previous = next;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_if_csv(std::ostream& out, double alpha, const Eigen::VectorXd& u_grid,
                  const Eigen::MatrixXd& curve, bool header) {
  if (header) out << "alpha,u,component,value\n";
  const Eigen::Index p = curve.cols() - 1;
  std::string line;
  for (Eigen::Index c = 0; c <= p; ++c) {
    const std::string name = c < p ? "beta" + std::to_string(c + 1) : std::string("sigma");
    for (Eigen::Index i = 0; i < u_grid.size(); ++i) {
      line.clear();
      append_double(line, alpha);
      line += ',';
      append_double(line, u_grid[i]);
      line += ',';
      line += name;
      line += ',';
      append_double(line, curve(i, c));
      line += '\n';
      out << line;
    }
  }
}

}  // namespace rpreg
