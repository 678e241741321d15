#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "rpreg/dataset.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/path.hpp"
#include "rpreg/simulation.hpp"

using namespace rpreg;

namespace {

Dataset noisy(int n, int p, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
    y[i] = 2.0 * x(i, 0) - x(i, 2) + 0.5 * normal(rng);
  }
  return standardize(x, y);
}

}  // namespace

TEST(Hbic, Arithmetic) {
  EXPECT_NEAR(hbic(0.5, 5, 100, 500), -0.9117532176, 1e-9);
  EXPECT_NEAR(hbic(0.5, 5, 100, 500), -0.91167, 1e-4);
  EXPECT_DOUBLE_EQ(hbic(0.7, 0, 50, 20), std::log(0.49));
  for (int df = 1; df < 10; ++df) EXPECT_GT(hbic(0.5, df, 100, 500), hbic(0.5, df - 1, 100, 500));
  EXPECT_THROW(hbic(0.5, 1, 2, 10), Error);
  EXPECT_THROW(hbic(0.0, 1, 20, 10), Error);
}

TEST(NullModel, GaussianCase) {
  const Dataset ds = noisy(30, 3, 1);
  const NullModel m = null_model(ds, 0.0);
  EXPECT_NEAR(m.intercept, ds.y.mean(), 1e-12);
  EXPECT_NEAR(m.sigma, std::sqrt((ds.y.array() - ds.y.mean()).square().mean()), 1e-12);
}

TEST(LambdaGrid, EndpointsAndGeometry) {
  const Dataset ds = noisy(40, 5, 2);
  const auto two = lambda_grid(ds, 0.3, 2, 0.01);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_DOUBLE_EQ(two[1], 0.01 * two[0]);
  const auto g = lambda_grid(ds, 0.3, 30, 0.05);
  const double ratio = g[1] / g[0];
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], ratio, 1e-12);
  EXPECT_THROW(lambda_grid(ds, 0.3, 1, 0.1), Error);
  EXPECT_THROW(lambda_grid(ds, 0.3, 10, 1.5), Error);
}

TEST(LambdaGrid, OrthonormalDesign) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 1, -1, -1, 1, -1, -1;
  // (1/n) x'x = I
  const Dataset ds = as_is(x, x.col(0));
  const auto g = lambda_grid(ds, 0.0, 2, 0.5);
  EXPECT_NEAR(g[0], 1.0, 1e-10);
}

TEST(LambdaGrid, LambdaMaxKillsEveryCoefficient) {
  const Dataset ds = noisy(50, 8, 3);
  for (double a : {0.0, 0.3}) {
    const auto g = lambda_grid(ds, a, 5, 0.1);
    SolverConfig config;
    config.alpha = a;
    const FitResult at_max = fit_residual_units(ds, PenaltySpec(PenaltyFamily::L1, g[0]), config);
    EXPECT_TRUE(at_max.active_set.empty());
    const FitResult below = fit_residual_units(ds, PenaltySpec(PenaltyFamily::L1, 0.9 * g[0]), config);
    EXPECT_FALSE(below.active_set.empty());
  }
}

TEST(FitPath, SinglePointGrid) {
  const Dataset ds = noisy(30, 4, 4);
  const auto g = lambda_grid(ds, 0.2, 2, 0.1);
  SolverConfig config;
  const PathResult res = fit_path(ds, 0.2, PenaltyFamily::SCAD, {g[0]}, config);
  EXPECT_EQ(res.selected_index, 0u);
  EXPECT_TRUE(res.selected().active_set.empty());
}

TEST(FitPath, RejectsUnsortedGrid) {
  const Dataset ds = noisy(30, 4, 4);
  EXPECT_THROW(fit_path(ds, 0.2, PenaltyFamily::SCAD, {0.1, 0.2}, SolverConfig{}), Error);
  EXPECT_THROW(fit_path(ds, 0.2, PenaltyFamily::SCAD, {}, SolverConfig{}), Error);
}

TEST(FitPath, EveryFitSatisfiesItsKkt) {
  const Dataset ds = noisy(60, 12, 5);
  SolverConfig config;
  const auto g = lambda_grid(ds, 0.3, 15, 0.02);
  const PathResult res = fit_path(ds, 0.3, PenaltyFamily::SCAD, g, config);
  ASSERT_TRUE(res.failures.empty());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const FitResult& f = *res.fits[k];
    EXPECT_DOUBLE_EQ(*f.lambda_residual, g[k]);
    const KktReport rep =
        kkt_check(ds, f.beta_std, f.intercept_std, f.sigma, 0.3, f.penalty, f.penalty_weight);
    EXPECT_LT(rep.active, 1e-4) << k;
    EXPECT_LT(rep.inactive, 1e-6) << k;
    EXPECT_NEAR(res.hbic[k], hbic(f.sigma, f.df(), 60, 12), 1e-12);
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_GE(res.hbic[k], res.hbic[res.selected_index]);
  }
}

TEST(FitPath, SelectsTrueSupportOnStrongSignal) {
  ScenarioSpec spec;
  spec.seed = 77;
  int hits = 0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const Replicate rep = generate(spec, r);
    const Dataset ds = as_is(rep.train.x, rep.train.y);
    const auto g = lambda_grid(ds, 0.1, 50, 0.01);
    const PathResult res = fit_path(ds, 0.1, PenaltyFamily::SCAD, g, SolverConfig{});
    const auto& active = res.selected().active_set;
    const std::set<Eigen::Index> got(active.begin(), active.end());
    hits += got == std::set<Eigen::Index>{0, 1, 3, 6, 10};
  }
  EXPECT_GE(hits, 9);
}
