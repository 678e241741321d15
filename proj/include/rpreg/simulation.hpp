#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpreg/penalty.hpp"
#include "rpreg/solver.hpp"

namespace rpreg {

enum class Signal { StrongA, WeakB };

enum class ContaminationKind { None, YOutliers, XOutliers };

// SampleColumns shifts the first n_cols covariates of each contaminated
// sample. LeadingRows shifts every covariate of the first n_cols rows instead.
enum class XOutlierLayout { SampleColumns, LeadingRows };

struct Contamination {
  ContaminationKind kind = ContaminationKind::None;
  double fraction = 0.1;
  double shift = 20.0;
  int n_cols = 10;
  XOutlierLayout layout = XOutlierLayout::SampleColumns;
  // X-outliers: the response is generated from the shifted covariates unless
  // this is set, in which case it follows the clean covariates (bad leverage).
  bool response_from_clean_x = false;

  static Contamination none() { return {}; }
  static Contamination y_outliers(double fraction = 0.1, double shift = 20.0);
  static Contamination x_outliers(double fraction = 0.1, double shift = 20.0, int n_cols = 10);
};

struct ScenarioSpec {
  int n = 100;
  int p = 100;
  double sigma0 = 0.5;
  Signal signal = Signal::StrongA;
  Contamination contamination;
  int replications = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RawData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

struct Replicate {
  RawData train;
  RawData test;
  Eigen::VectorXd beta0;
  std::vector<int> contaminated;  // train rows that were shifted, ascending
};

std::string_view to_string(Signal signal);
Signal parse_signal(std::string_view text);
std::string_view to_string(ContaminationKind kind);
ContaminationKind parse_contamination(std::string_view text);

// Setting A: beta_j = j on {1,2,4,7,11}. Setting B: (1.5, 0.5, 1, 1.5, 1) on
// the same support. Throws PTooSmall for p < 11.
Eigen::VectorXd true_beta(int p, Signal signal);

// Seed of replicate r's private stream; independent of evaluation order.
std::uint64_t replicate_seed(std::uint64_t root, std::uint64_t replicate);

// Rows of X follow an AR(1) recursion with correlation 0.5 between
// neighbouring columns; contamination touches the training set only.
Replicate generate(const ScenarioSpec& spec, int replicate);

struct MetricsRow {
  double ms = 0.0;
  double tp = 0.0;
  double tn = 0.0;
  double mses = 0.0;
  double msen = 0.0;
  double aprb = 0.0;
  double ee = 0.0;
  double rmse = 0.0;
};

MetricsRow metrics(const Eigen::VectorXd& beta, double intercept, double sigma,
                   const Eigen::VectorXd& beta0, double sigma0, const RawData& test);
MetricsRow metrics(const FitResult& fit, const Eigen::VectorXd& beta0, double sigma0,
                   const RawData& test);

struct Method {
  double alpha = 0.0;
  PenaltyFamily family = PenaltyFamily::SCAD;
  std::optional<double> shape;

  std::string label() const;
};

struct RunOptions {
  int grid_size = 50;
  double grid_ratio = 0.01;
  SolverConfig solver;
  int threads = 0;  // 0: OpenMP default
  // The generated columns already have unit variance, so by default the fit
  // runs on that scale (as_is) rather than rescaling by the contaminated sample sd.
  bool standardize = false;
};

struct ReplicateRecord {
  std::size_t method = 0;
  int replicate = 0;
  bool ok = false;
  std::string error;
  double lambda = 0.0;  // selected grid value (residual units)
  double sigma = 0.0;
  MetricsRow row;
};

struct MethodSummary {
  Method method;
  int succeeded = 0;
  int failed = 0;
  bool flagged = false;  // more than 5% of replicates failed
  MetricsRow mean;
};

struct ScenarioResult {
  ScenarioSpec spec;
  std::vector<MethodSummary> summaries;
  std::vector<ReplicateRecord> records;  // replicate-major, then method
};

// One replicate: generate, select lambda by HBIC for each method, score.
std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec,
                                           const std::vector<Method>& methods, int replicate,
                                           const RunOptions& options);

// Replicates run concurrently under OpenMP.
ScenarioResult run_scenario(const ScenarioSpec& spec, const std::vector<Method>& methods,
                            const RunOptions& options = {});
// Single-threaded reference producing identical output.
ScenarioResult run_scenario_serial(const ScenarioSpec& spec, const std::vector<Method>& methods,
                                   const RunOptions& options = {});

void write_summary_csv(std::ostream& out, const ScenarioResult& result);
void write_replicates_csv(std::ostream& out, const ScenarioResult& result);

struct SeriesPoint {
  double level = 0.0;  // contamination fraction or p
  std::size_t method = 0;
  double rmse = 0.0;
};
std::vector<SeriesPoint> rmse_vs_contamination(const ScenarioSpec& base,
                                               const std::vector<Method>& methods,
                                               const std::vector<double>& fractions,
                                               const RunOptions& options = {});
std::vector<SeriesPoint> rmse_vs_p(const ScenarioSpec& base, const std::vector<Method>& methods,
                                   const std::vector<int>& p_values,
                                   const RunOptions& options = {});
void write_series_csv(std::ostream& out, const std::string& level_name,
                      const std::vector<Method>& methods, const std::vector<SeriesPoint>& series);

}  // namespace rpreg
