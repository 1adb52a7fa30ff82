#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppde/dataset.hpp"
#include "ppde/families.hpp"
#include "ppde/training.hpp"

namespace ppde {

struct NetworkConfig {
  std::vector<int> hidden_widths;
  double alpha = 0.2;
  double init_std = 0.1;
  std::uint64_t seed = 1;
};

struct DataConfig {
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 1;  // test set uses seed + 1
};

struct ExperimentConfig {
  ParametricFamily family;
  int mesh_n = 33;
  NetworkConfig network;
  TrainConfig train;
  DataConfig data;
};

struct ResultRecord {
  std::string testcase;
  int p = 0;
  double sigma = 0, mu = 0, r = 0;
  int s = 0, k = 0;
  int n_train = 0;
  std::uint64_t seed = 0;
  double mean_rel_train = 0, mean_rel_test = 0, max_rel_test = 0;
  int epochs = 0;
  double wall_time_s = 0;
};

struct RegressionFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

// Ordinary least squares y ~ a x + b with R^2 = 1 - SS_res / SS_tot.
// Constant ys are fit exactly by the mean: slope 0, R^2 defined as 0.
inline RegressionFit linear_regression_r2(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw std::invalid_argument("linear_regression_r2: need >= 2 points");
  double x_mean = 0, y_mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= n;
  y_mean /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_regression_r2: xs are all equal");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - y_mean) * (ys[i] - y_mean);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

inline void fill_family_fields(ResultRecord& rec, const ParametricFamily& family) {
  rec.testcase = variant_name(family.variant);
  rec.p = family.p;
  rec.sigma = family.sigma;
  rec.mu = family.mu;
  rec.r = family.r;
  rec.s = family.s;
  rec.k = family.k;
}

inline std::vector<int> full_architecture(const ExperimentConfig& config) {
  std::vector<int> arch;
  arch.reserve(config.network.hidden_widths.size() + 2);
  arch.push_back(config.family.p);
  arch.insert(arch.end(), config.network.hidden_widths.begin(), config.network.hidden_widths.end());
  arch.push_back(config.mesh_n * config.mesh_n);
  return arch;
}

struct TestcaseRun {
  ResultRecord record;
  TrainHistory history;
  Network net;
};

// Generates train/test data (seeds seed and seed+1), trains a freshly
// initialized network, and evaluates both sets.
inline TestcaseRun run_testcase_full(const ExperimentConfig& config, int gen_threads = 0,
                                     std::ostream* history_csv = nullptr) {
  validate(config.family);
  if (config.data.n_train < 1 || config.data.n_test < 1)
    throw std::invalid_argument("run_testcase: n_train and n_test must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_mesh(config.mesh_n);
  const SparseMatrix gram = assemble_gram(mesh);
  const Dataset train_ds =
      generate(config.family, mesh, gram, config.data.n_train, config.data.seed, gen_threads);
  const Dataset test_ds =
      generate(config.family, mesh, gram, config.data.n_test, config.data.seed + 1, gen_threads);

  TestcaseRun run;
  run.net = init_network(full_architecture(config), config.network.init_std, config.network.seed,
                         config.network.alpha);
  TrainOptions options;
  options.test = &test_ds;
  options.csv = history_csv;
  run.history = train(run.net, train_ds, gram, config.train, options);

  fill_family_fields(run.record, config.family);
  run.record.n_train = config.data.n_train;
  run.record.seed = config.data.seed;
  run.record.epochs = config.train.epochs;
  run.record.mean_rel_train = run.history.train_error.back();
  const EvalResult test_eval = evaluate(run.net, test_ds, gram);
  run.record.mean_rel_test = test_eval.mean;
  run.record.max_rel_test = test_eval.max;
  run.record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

inline ResultRecord run_testcase(const ExperimentConfig& config, int gen_threads = 0) {
  return run_testcase_full(config, gen_threads).record;
}

// Same family shape and hyper-parameters, different parameter dimension.
// Throws if the variant cannot realize the requested p.
inline ParametricFamily family_with_dimension(const ParametricFamily& base, int p) {
  switch (base.variant) {
    case FamilyVariant::TrigPoly:
      return trig_poly(p, base.sigma, base.mu);
    case FamilyVariant::Chessboard:
    case FamilyVariant::CookiesFixed:
    case FamilyVariant::CookiesVariable: {
      const int cells = base.variant == FamilyVariant::CookiesVariable ? p / 2 : p;
      const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cells))));
      ParametricFamily f = base;
      f.s = s;
      f.p = p;
      validate(f);  // rejects p that is not s^2 (or 2 s^2)
      return f;
    }
    case FamilyVariant::ClippedPoly: {
      int k = 0;
      while ((k + 1) * (k + 2) / 2 < p) ++k;
      ParametricFamily f = base;
      f.k = k;
      f.p = p;
      validate(f);
      return f;
    }
  }
  throw std::invalid_argument("family_with_dimension: unknown variant");
}

struct ScalingStudy {
  std::vector<ResultRecord> records;
  RegressionFit fit;      // log(err) ~ log(p), or err ~ log(p) for clipped polynomials
  bool semilog = false;
};

// One run per parameter dimension with identical hyper-parameters and seeds;
// only the input layer width follows p.
inline ScalingStudy scaling_study(const ExperimentConfig& base, std::span<const int> p_values,
                                  int gen_threads = 0) {
  if (p_values.size() < 2) throw std::invalid_argument("scaling_study: need at least 2 p values");
  ScalingStudy study;
  study.semilog = base.family.variant == FamilyVariant::ClippedPoly;
  std::vector<double> xs, ys;
  for (int p : p_values) {
    ExperimentConfig config = base;
    config.family = family_with_dimension(base.family, p);
    study.records.push_back(run_testcase(config, gen_threads));
    xs.push_back(std::log(static_cast<double>(p)));
    const double err = study.records.back().mean_rel_test;
    ys.push_back(study.semilog ? err : std::log(err));
  }
  study.fit = linear_regression_r2(xs, ys);
  return study;
}

struct SampleSizeStudy {
  std::vector<ResultRecord> records;
  RegressionFit fit;  // mean test error ~ training set size
};

// Trains once per size on a prefix of one fixed training set (sample j
// depends only on (seed, j), so prefixes are the smaller datasets).
inline SampleSizeStudy sample_size_study(const ExperimentConfig& base, std::span<const int> sizes,
                                         int gen_threads = 0) {
  if (sizes.empty()) throw std::invalid_argument("sample_size_study: need at least one size");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    if (sizes[i] >= sizes[i + 1])
      throw std::invalid_argument("sample_size_study: sizes must be strictly increasing");
  if (sizes.back() > base.data.n_train)
    throw std::invalid_argument("sample_size_study: largest size exceeds n_train");

  const Mesh mesh = build_mesh(base.mesh_n);
  const SparseMatrix gram = assemble_gram(mesh);
  const Dataset full_train =
      generate(base.family, mesh, gram, base.data.n_train, base.data.seed, gen_threads);
  const Dataset test_ds =
      generate(base.family, mesh, gram, base.data.n_test, base.data.seed + 1, gen_threads);

  SampleSizeStudy study;
  std::vector<double> xs, ys;
  for (int size : sizes) {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset prefix;
    prefix.family = full_train.family;
    prefix.mesh_n = full_train.mesh_n;
    prefix.D = full_train.D;
    prefix.seed = full_train.seed;
    prefix.records.assign(full_train.records.begin(), full_train.records.begin() + size);

    Network net = init_network(full_architecture(base), base.network.init_std, base.network.seed,
                               base.network.alpha);
    TrainOptions options;
    options.test = &test_ds;
    const TrainHistory history = train(net, prefix, gram, base.train, options);

    ResultRecord rec;
    fill_family_fields(rec, base.family);
    rec.n_train = size;
    rec.seed = base.data.seed;
    rec.epochs = base.train.epochs;
    rec.mean_rel_train = history.train_error.back();
    const EvalResult test_eval = evaluate(net, test_ds, gram);
    rec.mean_rel_test = test_eval.mean;
    rec.max_rel_test = test_eval.max;
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    study.records.push_back(rec);

    xs.push_back(static_cast<double>(size));
    ys.push_back(rec.mean_rel_test);
  }
  if (xs.size() >= 2) study.fit = linear_regression_r2(xs, ys);
  return study;
}

struct ConvergenceSummary {
  double final_train = 0;
  double final_test = 0;
  double min_test = 0;
  bool overfit = false;
};

// Curve export plus the overfitting criterion: final test error more than
// 10% above the minimum test error seen during training.
inline ConvergenceSummary convergence_report(const TrainHistory& history, std::ostream* csv = nullptr) {
  if (history.train_error.empty()) throw std::invalid_argument("convergence_report: empty history");
  ConvergenceSummary summary;
  summary.final_train = history.train_error.back();
  if (csv) {
    std::size_t next_test = 0;
    for (std::size_t e = 0; e < history.train_error.size(); ++e) {
      (*csv) << (e + 1) << ',' << history.train_error[e];
      if (next_test < history.test_error.size() &&
          history.test_error[next_test].first == static_cast<int>(e + 1)) {
        (*csv) << ',' << history.test_error[next_test].second;
        ++next_test;
      }
      (*csv) << '\n';
    }
  }
  if (!history.test_error.empty()) {
    summary.final_test = history.test_error.back().second;
    summary.min_test = summary.final_test;
    for (const auto& [epoch, err] : history.test_error) summary.min_test = std::min(summary.min_test, err);
    summary.overfit = summary.final_test - summary.min_test > 0.1 * summary.min_test;
  }
  return summary;
}

inline constexpr const char* kResultsCsvHeader =
    "testcase,p,sigma,mu,r,s,k,n_train,seed,mean_rel_train,mean_rel_test,max_rel_test,epochs,"
    "wall_time_s";

inline void write_results_csv(std::span<const ResultRecord> records, std::ostream& out) {
  out << kResultsCsvHeader << '\n';
  for (const auto& rec : records) {
    out << rec.testcase << ',' << rec.p << ',' << rec.sigma << ',' << rec.mu << ',' << rec.r << ','
        << rec.s << ',' << rec.k << ',' << rec.n_train << ',' << rec.seed << ','
        << rec.mean_rel_train << ',' << rec.mean_rel_test << ',' << rec.max_rel_test << ','
        << rec.epochs << ',' << rec.wall_time_s << '\n';
  }
}

}  // namespace ppde
