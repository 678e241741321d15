#include "rpreg/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

#include <omp.h>

#include "rpreg/csv.hpp"
#include "rpreg/dataset.hpp"
#include "rpreg/errors.hpp"
#include "rpreg/path.hpp"

namespace rpreg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

Eigen::MatrixXd ar1_design(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = 0.5;
  const double innov = std::sqrt(1.0 - rho * rho);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    for (int j = 1; j < p; ++j) x(i, j) = rho * x(i, j - 1) + innov * normal(rng);
  }
  return x;
}

Eigen::VectorXd gaussian(int n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

std::vector<int> sample_without_replacement(int n, int count, std::mt19937_64& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < count; ++k) {
    const auto pick = k + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

ScenarioResult summarise(const ScenarioSpec& spec, const std::vector<Method>& methods,
                         std::vector<ReplicateRecord> records) {
  ScenarioResult result;
  result.spec = spec;
  result.records = std::move(records);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m];
    MetricsRow& acc = s.mean;
    for (const auto& rec : result.records) {
      if (rec.method != m) continue;
      if (!rec.ok) {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      acc.ms += rec.row.ms;
      acc.tp += rec.row.tp;
      acc.tn += rec.row.tn;
      acc.mses += rec.row.mses;
      acc.msen += rec.row.msen;
      acc.aprb += rec.row.aprb;
      acc.ee += rec.row.ee;
      acc.rmse += rec.row.rmse;
    }
    if (s.succeeded > 0) {
      const double k = static_cast<double>(s.succeeded);
      acc.ms /= k;
      acc.tp /= k;
      acc.tn /= k;
      acc.mses /= k;
      acc.msen /= k;
      acc.aprb /= k;
      acc.ee /= k;
      acc.rmse /= k;
    }
    s.flagged = s.failed * 20 > s.failed + s.succeeded;
    result.summaries.push_back(s);
  }
  return result;
}

std::vector<std::string> metric_cells(const MetricsRow& r) {
  return {format_double(r.ms),   format_double(r.tp),   format_double(r.tn),
          format_double(r.mses), format_double(r.msen), format_double(r.aprb),
          format_double(r.ee),   format_double(r.rmse)};
}

const std::vector<std::string> kMetricNames{"ms", "tp", "tn", "mses", "msen", "aprb", "ee", "rmse"};

}  // namespace

Contamination Contamination::y_outliers(double fraction, double shift) {
  Contamination c;
  c.kind = ContaminationKind::YOutliers;
  c.fraction = fraction;
  c.shift = shift;
  return c;
}

Contamination Contamination::x_outliers(double fraction, double shift, int n_cols) {
  Contamination c;
  c.kind = ContaminationKind::XOutliers;
  c.fraction = fraction;
  c.shift = shift;
  c.n_cols = n_cols;
  return c;
}

void ScenarioSpec::validate() const {
  if (n < 3) throw Error(ErrorCode::InvalidScenario, "n must be at least 3");
  if (p < 11) throw Error(ErrorCode::PTooSmall, "p must be at least 11");
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidScenario, "sigma0 must be positive");
  if (replications < 1) throw Error(ErrorCode::InvalidScenario, "replications must be >= 1");
  const auto& c = contamination;
  if (c.kind != ContaminationKind::None) {
    if (!(c.fraction >= 0.0 && c.fraction < 1.0)) {
      throw Error(ErrorCode::InvalidScenario, "contamination fraction must lie in [0, 1)");
    }
    if (!std::isfinite(c.shift)) throw Error(ErrorCode::InvalidScenario, "shift must be finite");
  }
  if (c.kind == ContaminationKind::XOutliers) {
    if (c.n_cols < 1 || c.n_cols > p) {
      throw Error(ErrorCode::InvalidScenario, "n_cols must lie in [1, p]");
    }
    if (c.layout == XOutlierLayout::LeadingRows && c.n_cols > n) {
      throw Error(ErrorCode::InvalidScenario, "n_cols exceeds n for the leading-rows layout");
    }
  }
}

std::string_view to_string(Signal signal) { return signal == Signal::StrongA ? "A" : "B"; }

Signal parse_signal(std::string_view text) {
  const std::string t = lower(text);
  if (t == "a" || t == "strong") return Signal::StrongA;
  if (t == "b" || t == "weak") return Signal::WeakB;
  throw Error(ErrorCode::InvalidScenario, "unknown signal setting '" + std::string(text) + "'");
}

std::string_view to_string(ContaminationKind kind) {
  switch (kind) {
    case ContaminationKind::None: return "none";
    case ContaminationKind::YOutliers: return "y";
    case ContaminationKind::XOutliers: return "x";
  }
  return "none";
}

ContaminationKind parse_contamination(std::string_view text) {
  const std::string t = lower(text);
  if (t == "none" || t == "clean") return ContaminationKind::None;
  if (t == "y" || t == "y-outliers") return ContaminationKind::YOutliers;
  if (t == "x" || t == "x-outliers") return ContaminationKind::XOutliers;
  throw Error(ErrorCode::InvalidScenario, "unknown contamination '" + std::string(text) + "'");
}

Eigen::VectorXd true_beta(int p, Signal signal) {
  if (p < 11) throw Error(ErrorCode::PTooSmall, "the signal settings need p >= 11");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (signal == Signal::StrongA) {
    for (int j : {1, 2, 4, 7, 11}) beta[j - 1] = j;
  } else {
    beta[0] = 1.5;
    beta[1] = 0.5;
    beta[3] = 1.0;
    beta[6] = 1.5;
    beta[10] = 1.0;
  }
  return beta;
}

std::uint64_t replicate_seed(std::uint64_t root, std::uint64_t replicate) {
  return splitmix64(splitmix64(root) ^ splitmix64(replicate + 0x632BE59BD9B4E019ULL));
}

Replicate generate(const ScenarioSpec& spec, int replicate) {
  spec.validate();
  std::mt19937_64 rng(replicate_seed(spec.seed, static_cast<std::uint64_t>(replicate)));
  Replicate out;
  out.beta0 = true_beta(spec.p, spec.signal);

  out.train.x = ar1_design(spec.n, spec.p, rng);
  const Eigen::VectorXd train_noise = gaussian(spec.n, spec.sigma0, rng);
  out.test.x = ar1_design(spec.n, spec.p, rng);
  out.test.y = out.test.x * out.beta0 + gaussian(spec.n, spec.sigma0, rng);

  const Contamination& c = spec.contamination;
  const Eigen::MatrixXd clean_x = out.train.x;
  if (c.kind != ContaminationKind::None) {
    const int count = static_cast<int>(std::floor(c.fraction * spec.n + 1e-9));
    if (c.kind == ContaminationKind::YOutliers) {
      out.contaminated = sample_without_replacement(spec.n, count, rng);
    } else if (c.layout == XOutlierLayout::SampleColumns) {
      out.contaminated = sample_without_replacement(spec.n, count, rng);
      for (int i : out.contaminated) out.train.x.row(i).head(c.n_cols).array() += c.shift;
    } else {
      for (int i = 0; i < c.n_cols; ++i) {
        out.contaminated.push_back(i);
        out.train.x.row(i).array() += c.shift;
      }
    }
  }

  const bool clean_response =
      c.kind == ContaminationKind::XOutliers && c.response_from_clean_x;
  out.train.y = (clean_response ? clean_x : out.train.x) * out.beta0 + train_noise;
  if (c.kind == ContaminationKind::YOutliers) {
    for (int i : out.contaminated) out.train.y[i] += c.shift;
  }
  return out;
}

MetricsRow metrics(const Eigen::VectorXd& beta, double intercept, double sigma,
                   const Eigen::VectorXd& beta0, double sigma0, const RawData& test) {
  const Eigen::Index p = beta0.size();
  if (beta.size() != p || test.x.cols() != p || test.x.rows() != test.y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "metrics inputs disagree in size");
  }
  int s = 0;
  int selected = 0;
  int true_pos = 0;
  int true_neg = 0;
  double sse_s = 0.0;
  double sse_n = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool in_truth = beta0[j] != 0.0;
    const bool in_fit = beta[j] != 0.0;
    selected += in_fit;
    if (in_truth) {
      ++s;
      true_pos += in_fit;
      sse_s += (beta[j] - beta0[j]) * (beta[j] - beta0[j]);
    } else {
      true_neg += !in_fit;
      sse_n += beta[j] * beta[j];
    }
  }
  if (s == 0) throw Error(ErrorCode::DomainError, "true support is empty");

  MetricsRow row;
  row.ms = selected;
  row.tp = static_cast<double>(true_pos) / s;
  row.tn = p > s ? static_cast<double>(true_neg) / static_cast<double>(p - s) : 1.0;
  row.mses = sse_s / s;
  row.msen = p > s ? sse_n / static_cast<double>(p - s) : 0.0;
  Eigen::VectorXd resid = test.y - test.x * beta;
  resid.array() -= intercept;
  row.aprb = resid.lpNorm<1>();
  row.ee = std::abs(sigma - sigma0);
  row.rmse = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
  return row;
}

MetricsRow metrics(const FitResult& fit, const Eigen::VectorXd& beta0, double sigma0,
                   const RawData& test) {
  return metrics(fit.beta, fit.intercept, fit.sigma, beta0, sigma0, test);
}

std::string Method::label() const {
  std::string out = "alpha=" + format_double(alpha) + " " + std::string(to_string(family));
  if (shape) out += " a=" + format_double(*shape);
  return out;
}

std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec,
                                           const std::vector<Method>& methods, int replicate,
                                           const RunOptions& options) {
  const Replicate data = generate(spec, replicate);
  std::vector<ReplicateRecord> out;
  std::optional<Dataset> ds;
  std::string data_error;
  try {
    ds = options.standardize ? standardize(data.train.x, data.train.y)
                             : as_is(data.train.x, data.train.y);
  } catch (const Error& e) {
    data_error = e.what();
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    ReplicateRecord rec;
    rec.method = m;
    rec.replicate = replicate;
    if (!ds) {
      rec.error = data_error;
      out.push_back(std::move(rec));
      continue;
    }
    try {
      const auto grid =
          lambda_grid(*ds, methods[m].alpha, options.grid_size, options.grid_ratio);
      const PathResult path =
          fit_path(*ds, methods[m].alpha, methods[m].family, grid, options.solver, methods[m].shape);
      const FitResult& best = path.selected();
      rec.ok = true;
      rec.lambda = path.lambdas[path.selected_index];
      rec.sigma = best.sigma;
      rec.row = metrics(best, data.beta0, spec.sigma0, data.test);
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const std::vector<Method>& methods,
                            const RunOptions& options) {
  spec.validate();
  const int reps = spec.replications;
  std::vector<std::vector<ReplicateRecord>> slots(static_cast<std::size_t>(reps));
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int r = 0; r < reps; ++r) {
    slots[static_cast<std::size_t>(r)] = run_replicate(spec, methods, r, options);
  }

  std::vector<ReplicateRecord> records;
  for (auto& slot : slots) {
    for (auto& rec : slot) records.push_back(std::move(rec));
  }
  return summarise(spec, methods, std::move(records));
}

ScenarioResult run_scenario_serial(const ScenarioSpec& spec, const std::vector<Method>& methods,
                                   const RunOptions& options) {
  spec.validate();
  std::vector<ReplicateRecord> records;
  for (int r = 0; r < spec.replications; ++r) {
    for (auto& rec : run_replicate(spec, methods, r, options)) records.push_back(std::move(rec));
  }
  return summarise(spec, methods, std::move(records));
}

void write_summary_csv(std::ostream& out, const ScenarioResult& result) {
  std::vector<std::string> header{"method", "alpha", "family", "succeeded", "failed", "flagged"};
  header.insert(header.end(), kMetricNames.begin(), kMetricNames.end());
  write_csv_row(out, header);
  for (std::size_t m = 0; m < result.summaries.size(); ++m) {
    const auto& s = result.summaries[m];
    std::vector<std::string> cells{std::to_string(m), format_double(s.method.alpha),
                                   std::string(to_string(s.method.family)),
                                   std::to_string(s.succeeded), std::to_string(s.failed),
                                   s.flagged ? "1" : "0"};
    const auto metric = metric_cells(s.mean);
    cells.insert(cells.end(), metric.begin(), metric.end());
    write_csv_row(out, cells);
  }
}

void write_replicates_csv(std::ostream& out, const ScenarioResult& result) {
  std::vector<std::string> header{"method", "replicate", "ok", "lambda", "sigma"};
  header.insert(header.end(), kMetricNames.begin(), kMetricNames.end());
  header.push_back("error");
  write_csv_row(out, header);
  for (const auto& rec : result.records) {
    std::vector<std::string> cells{std::to_string(rec.method), std::to_string(rec.replicate),
                                   rec.ok ? "1" : "0", format_double(rec.lambda),
                                   format_double(rec.sigma)};
    const auto metric = metric_cells(rec.row);
    cells.insert(cells.end(), metric.begin(), metric.end());
    std::string err = rec.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    cells.push_back(err);
    write_csv_row(out, cells);
  }
}

std::vector<SeriesPoint> rmse_vs_contamination(const ScenarioSpec& base,
                                               const std::vector<Method>& methods,
                                               const std::vector<double>& fractions,
                                               const RunOptions& options) {
  std::vector<SeriesPoint> series;
  for (double f : fractions) {
    ScenarioSpec spec = base;
    spec.contamination = f > 0.0 ? Contamination::y_outliers(f, base.contamination.shift)
                                 : Contamination::none();
    const ScenarioResult res = run_scenario(spec, methods, options);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      series.push_back({f, m, res.summaries[m].mean.rmse});
    }
  }
  return series;
}

std::vector<SeriesPoint> rmse_vs_p(const ScenarioSpec& base, const std::vector<Method>& methods,
                                   const std::vector<int>& p_values,
                                   const RunOptions& options) {
  std::vector<SeriesPoint> series;
  for (int p : p_values) {
    ScenarioSpec spec = base;
    spec.p = p;
    const ScenarioResult res = run_scenario(spec, methods, options);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      series.push_back({static_cast<double>(p), m, res.summaries[m].mean.rmse});
    }
  }
  return series;
}

void write_series_csv(std::ostream& out, const std::string& level_name,
                      const std::vector<Method>& methods, const std::vector<SeriesPoint>& series) {
  write_csv_row(out, {level_name, "method", "alpha", "family", "rmse"});
  for (const auto& pt : series) {
    const Method& m = methods.at(pt.method);
    write_csv_row(out, {format_double(pt.level), std::to_string(pt.method),
                        format_double(m.alpha), std::string(to_string(m.family)),
                        format_double(pt.rmse)});
  }
}

}  // namespace rpreg
