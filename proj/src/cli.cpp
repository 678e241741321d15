#include "rpreg/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpreg/csv.hpp"
#include "rpreg/dataset.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/influence.hpp"
#include "rpreg/path.hpp"
#include "rpreg/penalty.hpp"
#include "rpreg/simulation.hpp"
#include "rpreg/solver.hpp"

namespace rpreg::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelOptions {
  std::string input;
  std::string output;
  double alpha = 0.0;
  std::string family = "scad";
  std::optional<double> shape;
  bool raw_scale = false;
  double eps = 1e-8;
  int max_outer = 500;
};

struct FitOptions {
  ModelOptions model;
  std::optional<double> lambda;
  std::string units = "residual";
};

struct PathOptions {
  ModelOptions model;
  std::string table;
  int grid_size = 50;
  double grid_ratio = 0.01;
};

struct SimulateOptions {
  int n = 100;
  int p = 100;
  double sigma0 = 0.5;
  std::string signal = "A";
  std::string contamination = "none";
  double fraction = 0.1;
  double shift = 20.0;
  int x_cols = 10;
  std::string x_layout = "columns";
  bool bad_leverage = false;
  int replications = 1;
  std::uint64_t seed = 1;
  std::vector<double> alphas{0.0, 0.1, 0.3, 0.5};
  std::string family = "scad";
  std::optional<double> shape;
  int grid_size = 50;
  double grid_ratio = 0.01;
  int threads = 0;
  bool standardize = false;
  std::string out_dir;
  bool dump = false;
  std::vector<double> levels;
  std::vector<int> p_values;
};

struct InfluenceOptions {
  std::string fit_json;
  std::vector<double> beta;
  double sigma = 1.0;
  double lambda = 0.0;
  std::string family = "l1";
  std::optional<double> shape;
  std::vector<double> alphas{0.5};
  double rho = 0.5;
  double x_value = 1.0;
  double u_max = 5.0;
  double step = 0.01;
  std::string output;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("-i,--input", o.input, "CSV file: response first, then predictors")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", o.output, "JSON result file (stdout when omitted)");
  cmd->add_option("--alpha", o.alpha, "robustness parameter")->check(CLI::NonNegativeNumber);
  cmd->add_option("--penalty", o.family, "l1, scad or mcp");
  cmd->add_option("--shape", o.shape, "SCAD/MCP shape parameter a");
  cmd->add_flag("--raw-scale", o.raw_scale, "fit without standardizing the predictors");
  cmd->add_option("--eps", o.eps, "outer and inner relative tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-outer", o.max_outer, "maximum MM iterations")
      ->check(CLI::PositiveNumber);
}

struct LoadedData {
  RegressionData data;
  Dataset ds;
};

LoadedData load(const ModelOptions& o) {
  LoadedData out{to_regression(read_csv_file(o.input)), {}};
  try {
    out.ds = o.raw_scale ? as_is(out.data.x, out.data.y) : standardize(out.data.x, out.data.y);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConstantColumn && e.index() >= 0 &&
        static_cast<std::size_t>(e.index()) < out.data.predictor_names.size()) {
      throw Error(ErrorCode::ConstantColumn,
                  "column '" + out.data.predictor_names[static_cast<std::size_t>(e.index())] +
                      "' is constant",
                  e.index());
    }
    throw;
  }
  return out;
}

SolverConfig solver_config(const ModelOptions& o) {
  SolverConfig config;
  config.alpha = o.alpha;
  config.eps_outer = o.eps;
  config.eps_inner = o.eps;
  config.max_outer = o.max_outer;
  return config;
}

Json fit_json(const FitResult& fit, const RegressionData& data, bool standardized) {
  Json j;
  j["alpha"] = fit.alpha;
  j["lambda"] = fit.lambda;
  j["lambda_residual"] = fit.lambda_residual ? Json(*fit.lambda_residual) : Json(nullptr);
  j["family"] = std::string(to_string(fit.penalty.family()));
  j["shape"] = fit.penalty.a();
  j["penalty_weight"] = fit.penalty_weight;
  j["standardized"] = standardized;
  j["intercept"] = fit.intercept;
  j["beta"] = std::vector<double>(fit.beta.begin(), fit.beta.end());
  j["beta_standardized"] = std::vector<double>(fit.beta_std.begin(), fit.beta_std.end());
  j["predictors"] = data.predictor_names;
  j["sigma"] = fit.sigma;
  std::vector<Eigen::Index> active;
  for (Eigen::Index k : fit.active_set) active.push_back(k + 1);
  j["active_set"] = active;
  j["n_iter"] = fit.n_iter;
  j["converged"] = fit.converged;
  j["objective"] = fit.objective();
  return j;
}

void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << text;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path.string() + "' for writing");
  return file;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
  if (!o.lambda) throw UsageError("lambda required for fit");
  if (!(*o.lambda >= 0.0)) throw UsageError("lambda must be non-negative");
  const LoadedData loaded = load(o.model);
  const PenaltyFamily family = parse_penalty_family(o.model.family);
  const PenaltySpec spec(family, *o.lambda, o.model.shape.value_or(default_shape(family)));
  const SolverConfig config = solver_config(o.model);

  const FitResult result = o.units == "objective" ? fit(loaded.ds, spec, config)
                                                  : fit_residual_units(loaded.ds, spec, config);
  emit(o.model.output, out, fit_json(result, loaded.data, loaded.ds.standardized).dump(2) + "\n");
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_path(const PathOptions& o, std::ostream& out) {
  const LoadedData loaded = load(o.model);
  const PenaltyFamily family = parse_penalty_family(o.model.family);
  const SolverConfig config = solver_config(o.model);

  std::vector<double> grid;
  if (o.grid_size == 1) {
    grid = lambda_grid(loaded.ds, o.model.alpha, 2, o.grid_ratio);
    grid.resize(1);
  } else {
    grid = lambda_grid(loaded.ds, o.model.alpha, o.grid_size, o.grid_ratio);
  }
  const PathResult path = fit_path(loaded.ds, o.model.alpha, family, grid, config, o.model.shape);

  std::ostringstream table;
  write_csv_row(table, {"lambda", "hbic", "df", "sigma", "objective", "converged"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!path.fits[k]) {
      write_csv_row(table, {format_double(grid[k]), "nan", "", "", "", "false"});
      continue;
    }
    const FitResult& f = *path.fits[k];
    write_csv_row(table, {format_double(grid[k]), format_double(path.hbic[k]),
                          std::to_string(f.df()), format_double(f.sigma),
                          format_double(f.objective()), f.converged ? "true" : "false"});
  }
  if (o.table.empty()) {
    out << table.str();
  } else {
    emit(o.table, out, table.str());
  }

  const FitResult& selected = path.selected();
  Json j = fit_json(selected, loaded.data, loaded.ds.standardized);
  j["selected_index"] = path.selected_index;
  j["hbic"] = path.hbic[path.selected_index];
  Json failures = Json::array();
  for (const PathFailure& f : path.failures) {
    failures.push_back({{"index", f.index}, {"lambda", grid[f.index]}, {"message", f.message}});
  }
  j["failures"] = failures;
  if (!o.model.output.empty()) emit(o.model.output, out, j.dump(2) + "\n");
  return selected.converged ? kExitOk : kExitNotConverged;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  ScenarioSpec spec;
  spec.n = o.n;
  spec.p = o.p;
  spec.sigma0 = o.sigma0;
  spec.signal = parse_signal(o.signal);
  spec.replications = o.replications;
  spec.seed = o.seed;
  const ContaminationKind kind = parse_contamination(o.contamination);
  if (kind == ContaminationKind::YOutliers) {
    spec.contamination = Contamination::y_outliers(o.fraction, o.shift);
  } else if (kind == ContaminationKind::XOutliers) {
    spec.contamination = Contamination::x_outliers(o.fraction, o.shift, o.x_cols);
    spec.contamination.layout =
        o.x_layout == "rows" ? XOutlierLayout::LeadingRows : XOutlierLayout::SampleColumns;
    spec.contamination.response_from_clean_x = o.bad_leverage;
  }
  spec.validate();

  const PenaltyFamily family = parse_penalty_family(o.family);
  std::vector<Method> methods;
  for (double a : o.alphas) {
    if (!(a >= 0.0)) throw UsageError("alpha values must be non-negative");
    methods.push_back({a, family, o.shape});
  }
  if (methods.empty()) throw UsageError("at least one alpha is required");

  RunOptions options;
  options.grid_size = o.grid_size;
  options.grid_ratio = o.grid_ratio;
  options.threads = o.threads;
  options.standardize = o.standardize;

  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create '" + o.out_dir + "': " + ec.message());

  if (o.dump) {
    const Replicate rep = generate(spec, 0);
    std::ofstream train = open_out(dir / "train.csv");
    write_regression_csv(train, rep.train.x, rep.train.y);
    std::ofstream test = open_out(dir / "test.csv");
    write_regression_csv(test, rep.test.x, rep.test.y);
  }

  const ScenarioResult result = run_scenario(spec, methods, options);
  {
    std::ofstream f = open_out(dir / "summary.csv");
    write_summary_csv(f, result);
  }
  {
    std::ofstream f = open_out(dir / "replicates.csv");
    write_replicates_csv(f, result);
  }
  if (!o.levels.empty()) {
    std::ofstream f = open_out(dir / "series_contamination.csv");
    write_series_csv(f, "fraction", methods, rmse_vs_contamination(spec, methods, o.levels, options));
  }
  if (!o.p_values.empty()) {
    std::ofstream f = open_out(dir / "series_p.csv");
    write_series_csv(f, "p", methods, rmse_vs_p(spec, methods, o.p_values, options));
  }
  write_summary_csv(out, result);
  return kExitOk;
}

Eigen::MatrixXd ar1_covariance(Eigen::Index p, double rho) {
  Eigen::MatrixXd s(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return s;
}

int cmd_influence(const InfluenceOptions& o, std::ostream& out) {
  IfSetting setting;
  if (!o.fit_json.empty()) {
    std::ifstream in(o.fit_json);
    if (!in) throw UsageError("cannot read '" + o.fit_json + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("'" + o.fit_json + "' is not valid JSON: " + e.what());
    }
    try {
      const auto beta = j.at("beta").get<std::vector<double>>();
      setting.beta_star = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      setting.sigma_star = j.at("sigma").get<double>();
      const PenaltyFamily family = parse_penalty_family(j.at("family").get<std::string>());
      setting.penalty = PenaltySpec(family, j.at("lambda").get<double>(),
                                    j.value("shape", default_shape(family)));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("'" + o.fit_json + "' lacks a fit result field: " + e.what());
    }
  } else {
    if (o.beta.empty()) throw UsageError("either --fit or --beta is required");
    setting.beta_star = Eigen::Map<const Eigen::VectorXd>(o.beta.data(), static_cast<Eigen::Index>(o.beta.size()));
    setting.sigma_star = o.sigma;
    const PenaltyFamily family = parse_penalty_family(o.family);
    setting.penalty = PenaltySpec(family, o.lambda, o.shape.value_or(default_shape(family)));
  }
  if (!(o.u_max > 0.0) || !(o.step > 0.0)) throw UsageError("--u-max and --step must be positive");
  const Eigen::Index p = setting.beta_star.size();
  setting.exx = ar1_covariance(p, o.rho);
  const Eigen::VectorXd x_t = Eigen::VectorXd::Constant(p, o.x_value);
  const Eigen::VectorXd u = uniform_grid(-o.u_max, o.u_max, o.step);

  std::ostringstream csv;
  bool header = true;
  for (double a : o.alphas) {
    setting.alpha = a;
    write_if_csv(csv, a, u, if_curve(setting, u, x_t), header);
    header = false;
  }
  emit(o.output, out, csv.str());
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust sparse linear regression with the Renyi pseudodistance loss", "rpreg"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  FitOptions fit_o;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one lambda");
  add_model_options(fit_cmd, fit_o.model);
  fit_cmd->add_option("--lambda", fit_o.lambda, "penalty level");
  fit_cmd->add_option("--lambda-units", fit_o.units, "residual (path units) or objective")
      ->check(CLI::IsMember({"residual", "objective"}));

  PathOptions path_o;
  CLI::App* path_cmd = app.add_subcommand("path", "fit a lambda grid and select by HBIC");
  add_model_options(path_cmd, path_o.model);
  path_cmd->add_option("--table", path_o.table, "per-lambda CSV (stdout when omitted)");
  path_cmd->add_option("--grid-size", path_o.grid_size, "number of lambdas")
      ->check(CLI::PositiveNumber);
  path_cmd->add_option("--grid-ratio", path_o.grid_ratio, "lambda_min / lambda_max")
      ->check(CLI::Range(0.0, 1.0));

  SimulateOptions sim_o;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a contamination scenario");
  sim_cmd->add_option("--n", sim_o.n);
  sim_cmd->add_option("--p", sim_o.p);
  sim_cmd->add_option("--sigma0", sim_o.sigma0);
  sim_cmd->add_option("--signal", sim_o.signal, "A or B");
  sim_cmd->add_option("--contamination", sim_o.contamination, "none, y or x");
  sim_cmd->add_option("--fraction", sim_o.fraction, "share of contaminated training rows");
  sim_cmd->add_option("--shift", sim_o.shift);
  sim_cmd->add_option("--x-cols", sim_o.x_cols, "covariates shifted per X-outlier");
  sim_cmd->add_option("--x-layout", sim_o.x_layout)
      ->check(CLI::IsMember({"columns", "rows"}));
  sim_cmd->add_flag("--bad-leverage", sim_o.bad_leverage,
                    "generate the response from the clean covariates");
  sim_cmd->add_option("--replications", sim_o.replications);
  sim_cmd->add_option("--seed", sim_o.seed);
  sim_cmd->add_option("--alpha", sim_o.alphas, "comma-separated alphas")->delimiter(',');
  sim_cmd->add_option("--penalty", sim_o.family);
  sim_cmd->add_option("--shape", sim_o.shape);
  sim_cmd->add_option("--grid-size", sim_o.grid_size)->check(CLI::Range(2, 100000));
  sim_cmd->add_option("--grid-ratio", sim_o.grid_ratio)->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--threads", sim_o.threads, "worker cap (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_flag("--standardize", sim_o.standardize,
                    "standardize each training set before fitting");
  sim_cmd->add_option("--out-dir", sim_o.out_dir)->required();
  sim_cmd->add_flag("--dump", sim_o.dump, "write replicate 0 as train.csv and test.csv");
  sim_cmd->add_option("--contamination-levels", sim_o.levels)->delimiter(',');
  sim_cmd->add_option("--p-values", sim_o.p_values)->delimiter(',');

  InfluenceOptions inf_o;
  CLI::App* inf_cmd = app.add_subcommand("influence", "influence-function curves");
  inf_cmd->add_option("--fit", inf_o.fit_json, "fit result JSON")->check(CLI::ExistingFile);
  inf_cmd->add_option("--beta", inf_o.beta, "comma-separated beta_*")->delimiter(',');
  inf_cmd->add_option("--sigma", inf_o.sigma);
  inf_cmd->add_option("--lambda", inf_o.lambda);
  inf_cmd->add_option("--penalty", inf_o.family);
  inf_cmd->add_option("--shape", inf_o.shape);
  inf_cmd->add_option("--alpha", inf_o.alphas, "comma-separated alphas")->delimiter(',');
  inf_cmd->add_option("--rho", inf_o.rho, "AR(1) correlation of E[XX']");
  inf_cmd->add_option("--x-value", inf_o.x_value, "every component of the contaminating x");
  inf_cmd->add_option("--u-max", inf_o.u_max);
  inf_cmd->add_option("--step", inf_o.step);
  inf_cmd->add_option("-o,--output", inf_o.output, "CSV file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_o, out);
    if (*path_cmd) return cmd_path(path_o, out);
    if (*sim_cmd) return cmd_simulate(sim_o, out);
    return cmd_influence(inf_o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInput;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace rpreg::cli
