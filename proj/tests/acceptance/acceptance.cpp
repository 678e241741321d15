#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpreg/cli.hpp"
#include "rpreg/dataset.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/influence.hpp"
#include "rpreg/path.hpp"
#include "rpreg/penalty.hpp"
#include "rpreg/simulation.hpp"
#include "rpreg/solver.hpp"

using namespace rpreg;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Eigen::MatrixXd ar1(int p, double rho) {
  Eigen::MatrixXd s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

const MethodSummary& only(const ScenarioResult& r, std::size_t m = 0) { return r.summaries.at(m); }

void clean_selection() {
  ScenarioSpec spec;
  spec.n = 100;
  spec.p = 100;
  spec.replications = 50;
  spec.seed = 20240101;
  const ScenarioResult r = run_scenario(spec, {{0.1, PenaltyFamily::SCAD, std::nullopt}});
  const MetricsRow& m = only(r).mean;
  const bool pass = only(r).failed == 0 && m.ms >= 4.5 && m.ms <= 5.5 && m.tp >= 0.98 &&
                    m.tn >= 0.99 && m.mses <= 0.01 && m.ee <= 0.08;
  report("clean-data selection (n=100, p=100, alpha=0.1 SCAD, R=50)", pass,
         fmt("MS=%.3f TP=%.4f TN=%.4f MSES=%.5f EE=%.5f failed=%d", m.ms, m.tp, m.tn, m.mses,
             m.ee, only(r).failed));
}

void robustness_contrast() {
  ScenarioSpec spec;
  spec.n = 100;
  spec.p = 500;
  spec.replications = 20;
  spec.seed = 20240202;
  const std::vector<Method> methods{{0.0, PenaltyFamily::SCAD, std::nullopt},
                                    {0.3, PenaltyFamily::SCAD, std::nullopt}};
  ScenarioSpec dirty = spec;
  dirty.contamination = Contamination::y_outliers(0.1, 20.0);
  const ScenarioResult contaminated = run_scenario(dirty, methods);
  const ScenarioResult clean = run_scenario(spec, {methods[1]});
  const double ls = only(contaminated, 0).mean.mses;
  const double rp = only(contaminated, 1).mean.mses;
  const double rp_clean = only(clean).mean.mses;
  const bool pass = only(contaminated, 1).failed == 0 && ls / rp >= 10.0 && rp <= 2.0 * rp_clean;
  report("Y-outlier robustness contrast (p=500, R=20)", pass,
         fmt("MSES alpha=0: %.5f, alpha=0.3: %.5f (ratio %.1f), alpha=0.3 clean: %.5f", ls, rp,
             ls / rp, rp_clean));
}

void x_outlier_stability() {
  ScenarioSpec spec;
  spec.n = 100;
  spec.p = 500;
  spec.replications = 20;
  spec.seed = 20240303;
  spec.contamination = Contamination::x_outliers(0.1, 20.0, 10);
  std::vector<Method> methods;
  for (double a : {0.1, 0.2, 0.3, 0.4, 0.5}) methods.push_back({a, PenaltyFamily::SCAD, std::nullopt});
  const ScenarioResult r = run_scenario(spec, methods);
  bool pass = true;
  std::string detail;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const MetricsRow& row = r.summaries[m].mean;
    pass = pass && r.summaries[m].failed == 0 && row.tp >= 0.98 && row.tn >= 0.99 && row.ee <= 0.10;
    detail += fmt("%salpha=%.1f TP=%.3f TN=%.4f EE=%.4f", m ? "; " : "", methods[m].alpha, row.tp,
                  row.tn, row.ee);
  }
  report("X-outlier stability (p=500, alpha 0.1..0.5, R=20)", pass, detail);
}

struct Instance {
  Dataset ds;
  double lambda_max = 0.0;
};

Instance random_instance(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < std::min(p, 4); ++j) beta[j] = 2.0 - 0.5 * j;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
  y = x * beta;
  for (int i = 0; i < n; ++i) y[i] += 0.5 * normal(rng) + (i % 10 == 0 ? 10.0 : 0.0);
  Instance inst{standardize(x, y), 0.0};
  inst.lambda_max = lambda_grid(inst.ds, 0.0, 2, 0.5)[0];
  return inst;
}

void mm_descent() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  const int ns[] = {20, 100};
  const int ps[] = {5, 100};
  const double alphas[] = {0.0, 0.1, 0.5, 1.0};
  const PenaltyFamily fams[] = {PenaltyFamily::L1, PenaltyFamily::SCAD, PenaltyFamily::MCP};
  int violations = 0, errors = 0, runs = 0, collapsed = 0;
  double worst = 0.0;
  std::string first_error;
  for (int k = 0; k < 200; ++k) {
    const int n = ns[k % 2];
    const int p = ps[(k / 2) % 2];
    const double a = alphas[(k / 4) % 4];
    const PenaltyFamily fam = fams[(k / 16) % 3];
    const Instance inst = random_instance(n, p, rng);
    SolverConfig config;
    config.alpha = a;
    // Q-scale level: the residual-unit lambda times the null-model curvature.
    const NullModel null = null_model(inst.ds, a);
    const double curvature = majorizer_curvature(inst.ds.y.array() - null.intercept, null.sigma, a);
    const double lambda = frac(rng) * inst.lambda_max * curvature;
    const auto scan = [&](const std::vector<double>& trace) {
      for (std::size_t t = 1; t < trace.size(); ++t) {
        const double rise = trace[t] - trace[t - 1];
        worst = std::max(worst, rise);
        violations += rise > 1e-9;
      }
    };
    try {
      scan(fit(inst.ds, PenaltySpec(fam, lambda), config).objective_trace);
      ++runs;
    } catch (const ScaleCollapse& e) {
      scan(e.objective_trace());
      ++collapsed;
    }
    try {
      const PenaltySpec residual_spec(fam, lambda / curvature);
      scan(fit_residual_units(inst.ds, residual_spec, config).objective_trace);
      ++runs;
    } catch (const Error& e) {
      ++errors;
      if (first_error.empty()) first_error = e.what();
    }
  }
  report("MM descent (200 instances)", violations == 0 && errors == 0,
         fmt("%d complete traces, %d traces ending in scale collapse, %d trace violations, "
             "largest rise %.3g, %d residual-unit solver errors%s%s",
             runs, collapsed, violations, worst, errors, first_error.empty() ? "" : ": ",
             first_error.c_str()));
}

void brute_force() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double alphas[] = {0.1, 0.3, 0.5};
  const PenaltyFamily fams[] = {PenaltyFamily::L1, PenaltyFamily::SCAD, PenaltyFamily::MCP};
  int bad = 0;
  double worst = -INFINITY;
  for (int k = 0; k < 30; ++k) {
    const double a = alphas[k % 3];
    const PenaltySpec spec(fams[(k / 3) % 3], 0.1);
    const double b1 = 1.0, b2 = -0.5, s0 = 0.5;
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
      x(i, 0) = normal(rng);
      x(i, 1) = normal(rng);
      y[i] = b1 * x(i, 0) + b2 * x(i, 1) + s0 * normal(rng);
    }
    const Dataset ds = as_is(x, y);
    SolverConfig config;
    config.alpha = a;
    config.fit_intercept = false;
    config.eps_outer = 1e-13;
    config.eps_inner = 1e-13;
    double q_solver;
    try {
      // Started from the unpenalized RP fit.
      const FitResult start = fit(ds, PenaltySpec(spec.family(), 0.0), config);
      SolverConfig polish = config;
      polish.init = Initialization::custom(start.beta_std, start.sigma, start.intercept_std);
      q_solver = fit(ds, spec, polish).objective();
    } catch (const Error&) {
      ++bad;
      continue;
    }
    const double c = a / (a + 1.0);
    double grid_min = INFINITY;
    Eigen::VectorXd r(20);
    for (int i1 = 0; i1 <= 200; ++i1) {
      const double g1 = b1 - 3.0 + 0.03 * i1;
      for (int i2 = 0; i2 <= 200; ++i2) {
        const double g2 = b2 - 3.0 + 0.03 * i2;
        r = y - g1 * x.col(0) - g2 * x.col(1);
        const double pen = penalty_value(std::abs(g1), spec) + penalty_value(std::abs(g2), spec);
        const Eigen::ArrayXd r2 = r.array().square();
        for (int i3 = 0; i3 <= 200; ++i3) {
          const double s = 0.02 + (s0 + 3.0 - 0.02) * i3 / 200.0;
          const double mean_w = (-0.5 * a / (s * s) * r2).exp().mean();
          grid_min = std::min(grid_min, -std::pow(s, -c) * mean_w + pen);
        }
      }
    }
    worst = std::max(worst, q_solver - grid_min);
    bad += q_solver > grid_min + 1e-3;
  }
  report("brute-force optimality (30 instances, robust start, 201^3 grid)", bad == 0,
         fmt("%d instances above grid minimum + 1e-3; max(Q_solver - Q_grid) = %.3g", bad, worst));
}

void lasso_kkt() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> frac(0.05, 0.9);
  double worst = 0.0;
  int errors = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = k % 2 ? 100 : 40;
    const int p = k % 3 ? 20 : 150;
    const Instance inst = random_instance(n, p, rng);
    SolverConfig config;
    config.eps_outer = 1e-15;
    config.eps_inner = 1e-15;
    config.max_inner = 100000;
    const PenaltySpec spec(PenaltyFamily::L1, frac(rng) * inst.lambda_max);
    try {
      const FitResult f = fit_residual_units(inst.ds, spec, config);
      const KktReport rep = kkt_check(inst.ds, f.beta_std, f.intercept_std, f.sigma, 0.0, spec,
                                      f.penalty_weight);
      worst = std::max({worst, rep.active, rep.inactive});
    } catch (const Error&) {
      ++errors;
    }
  }
  report("alpha=0 L1 KKT (50 instances)", worst < 1e-6 && errors == 0,
         fmt("max KKT residual at fixed sigma-hat %.3g, %d solver errors", worst, errors));
}

double univariate_objective(double b, double z, const PenaltySpec& spec) {
  return 0.5 * (z - b) * (z - b) + penalty_value(std::abs(b), spec);
}

double grid_argmin(double z, const PenaltySpec& spec) {
  const double span = std::abs(z) + 1.0;
  double best = 0.0, best_val = univariate_objective(0.0, z, spec);
  for (double b = -span; b <= span; b += 1e-3) {
    const double v = univariate_objective(b, z, spec);
    if (v < best_val) best_val = v, best = b;
  }
  const double centre = best;
  for (double b = centre - 2e-3; b <= centre + 2e-3; b += 1e-6) {
    const double v = univariate_objective(b, z, spec);
    if (v < best_val) best_val = v, best = b;
  }
  return best;
}

void univariate_oracle() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> z_dist(-10.0, 10.0);
  std::uniform_real_distribution<double> l_dist(0.05, 3.0);
  std::string detail;
  bool pass = true;
  for (PenaltyFamily fam : {PenaltyFamily::L1, PenaltyFamily::SCAD, PenaltyFamily::MCP}) {
    std::uniform_real_distribution<double> a_dist(fam == PenaltyFamily::MCP ? 1.1 : 2.1, 6.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const PenaltySpec spec(fam, l_dist(rng), a_dist(rng));
      const double z = z_dist(rng);
      worst = std::max(worst, std::abs(univariate_min(z, spec) - grid_argmin(z, spec)));
    }
    pass = pass && worst <= 1e-4;
    detail += fmt("%s%s max |diff| %.2g", detail.empty() ? "" : "; ",
                  std::string(to_string(fam)).c_str(), worst);
  }
  report("univariate minimizer vs grid (1000 triples per family)", pass, detail);
}

void j_alpha_monte_carlo() {
  const int p = 3;
  const int draws = 1000000;
  const Eigen::MatrixXd sigma_x = ar1(p, 0.5);
  const Eigen::MatrixXd chol = sigma_x.llt().matrixL();
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_z = 0.0;
  for (double a : {0.5, 1.0}) {
    IfSetting s;
    s.beta_star = Eigen::Vector3d(1.0, -0.5, 0.25);
    s.sigma_star = 0.8;
    s.alpha = a;
    s.exx = sigma_x;
    const Eigen::MatrixXd j = j_alpha(s);
    const double k = (2 * a + 1) / (a + 1);
    const double lead = a * std::pow(s.sigma_star, -k - 1.0);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p + 1, p + 1);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(p + 1, p + 1);
    Eigen::MatrixXd h(p + 1, p + 1);
    Eigen::VectorXd e(p);
    for (int d = 0; d < draws; ++d) {
      for (int c = 0; c < p; ++c) e[c] = normal(rng);
      const Eigen::VectorXd x = chol * e;
      const double u = normal(rng);
      const double w = std::exp(-0.5 * a * u * u);
      const double f1 = u * w;
      const double f1p = (1.0 - a * u * u) * w;
      const double f2 = (u * u - 1.0 / (a + 1.0)) * w;
      const double f2p = 2.0 * u * w - a * u * (u * u - 1.0 / (a + 1.0)) * w;
      h.topLeftCorner(p, p) = lead * f1p * x * x.transpose();
      h.topRightCorner(p, 1) = lead * (k * f1 + u * f1p) * x;
      h.bottomLeftCorner(1, p) = lead * f2p * x.transpose();
      h(p, p) = lead * (k * f2 + u * f2p);
      sum += h;
      sum_sq += h.cwiseAbs2();
    }
    const Eigen::MatrixXd mean = sum / draws;
    const Eigen::MatrixXd var = (sum_sq / draws - mean.cwiseAbs2()) / (draws - 1.0);
    for (int r = 0; r <= p; ++r) {
      for (int c = 0; c <= p; ++c) {
        worst_z = std::max(worst_z, std::abs(mean(r, c) - j(r, c)) / std::sqrt(var(r, c)));
      }
    }
  }
  report("J_alpha closed form vs Monte Carlo (1e6 draws, alpha 0.5 and 1)", worst_z <= 3.0,
         fmt("largest |MC - closed form| = %.2f standard errors", worst_z));
}

void if_contract() {
  IfSetting templ;
  templ.beta_star = Eigen::Vector4d(0.5, 0.5, 0.0, 0.0);
  templ.sigma_star = 0.5;
  templ.exx = ar1(4, 0.5);
  templ.penalty = PenaltySpec(PenaltyFamily::SCAD, 0.1);
  const Eigen::VectorXd x_t = Eigen::VectorXd::Ones(4);
  const auto rows = boundedness_report({0.0, 0.1, 0.3, 0.5}, templ, x_t, 50.0, 0.01, 3);

  bool pass = true;
  std::string detail;
  double min_growth = INFINITY;
  for (double g : rows[0].growth) min_growth = std::min(min_growth, g);
  pass = pass && min_growth >= 1.9;
  detail += fmt("alpha=0 min growth per doubling %.2f", min_growth);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    double max_growth = 0.0;
    for (double g : rows[k].growth) max_growth = std::max(max_growth, g);
    const bool ok = std::isfinite(rows[k].sup_norm) && !rows[k].unbounded && max_growth < 1.0 + 1e-9;
    pass = pass && ok;
    detail += fmt("; alpha=%.1f sup %.4g at u=%.2f", rows[k].alpha, rows[k].sup_norm,
                  rows[k].argmax_u);
  }
  const Eigen::VectorXd u = uniform_grid(-50.0, 50.0, 0.01);
  double zero_max = 0.0;
  for (double a : {0.0, 0.1, 0.3, 0.5}) {
    IfSetting s = templ;
    s.alpha = a;
    const Eigen::MatrixXd c = if_curve(s, u, x_t);
    zero_max = std::max({zero_max, c.col(2).cwiseAbs().maxCoeff(), c.col(3).cwiseAbs().maxCoeff()});
  }
  pass = pass && zero_max == 0.0;
  detail += fmt("; zero-coefficient components max |IF| = %g", zero_max);
  report("influence-function contract", pass, detail);
}

void hbic_arithmetic() {
  const double v = hbic(0.5, 5, 100, 500);
  report("HBIC arithmetic", std::abs(v - (-0.91167)) <= 1e-4, fmt("hbic = %.6f", v));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "rpreg_acceptance_determinism";
  fs::remove_all(root);
  auto invoke = [&](const std::string& dir) {
    const std::string out = (root / dir).string();
    const char* argv[] = {"rpreg", "simulate", "--n", "60", "--p", "40", "--replications", "4",
                          "--contamination", "x", "--alpha", "0,0.3", "--seed", "123",
                          "--contamination-levels", "0,0.1", "--dump", "--out-dir", out.c_str()};
    std::ostringstream sink_out, sink_err;
    return cli::run(static_cast<int>(std::size(argv)), argv, sink_out, sink_err);
  };
  const int a = invoke("a");
  const int b = invoke("b");
  int differing = 0, files = 0;
  for (const char* f : {"summary.csv", "replicates.csv", "series_contamination.csv", "train.csv",
                        "test.csv"}) {
    ++files;
    const std::string x = slurp(root / "a" / f);
    differing += x.empty() || x != slurp(root / "b" / f);
  }
  fs::remove_all(root);
  report("determinism of simulate", a == 0 && b == 0 && differing == 0,
         fmt("exit codes %d/%d, %d of %d output files differ or are empty", a, b, differing, files));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  hbic_arithmetic();
  univariate_oracle();
  lasso_kkt();
  mm_descent();
  brute_force();
  j_alpha_monte_carlo();
  if_contract();
  determinism();
  clean_selection();
  robustness_contrast();
  x_outlier_stability();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed; %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
