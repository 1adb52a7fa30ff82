#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ppde/experiment.hpp"

using namespace ppde;

namespace {

// Minutes-scale smoke profile; the full desk profile lives in the acceptance suite.
ExperimentConfig smoke_config() {
  ExperimentConfig config;
  config.family = trig_poly(2, 0.0, 1.0);
  config.mesh_n = 17;
  config.network.hidden_widths = {30, 30};
  config.network.alpha = 0.2;
  config.network.init_std = 0.1;
  config.network.seed = 3;
  config.train.batch_size = 256;
  config.train.epochs = 50;
  config.train.seed = 4;
  config.data.n_train = 200;
  config.data.n_test = 50;
  config.data.seed = 5;
  return config;
}

}  // namespace

TEST_CASE("least squares with hand-checked values", "[experiment]") {
  const std::vector<double> xs = {1, 2, 3};
  const std::vector<double> ys = {2, 3, 5};
  const RegressionFit fit = linear_regression_r2(xs, ys);
  CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(1.5, 1e-12));
  CHECK_THAT(fit.intercept, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(fit.r2, Catch::Matchers::WithinAbs(27.0 / 28.0, 1e-12));
}

TEST_CASE("regression degenerate cases", "[experiment]") {
  const std::vector<double> xs = {1, 2, 3, 4};
  const std::vector<double> collinear = {3, 5, 7, 9};
  CHECK_THAT(linear_regression_r2(xs, collinear).r2, Catch::Matchers::WithinAbs(1.0, 1e-12));

  const std::vector<double> constant = {2, 2, 2, 2};
  const RegressionFit fit = linear_regression_r2(xs, constant);
  CHECK(fit.slope == 0.0);
  CHECK(fit.r2 == 0.0);

  const std::vector<double> equal_xs = {1, 1, 1, 1};
  CHECK_THROWS_AS(linear_regression_r2(equal_xs, collinear), std::invalid_argument);
  const std::vector<double> too_few = {1};
  CHECK_THROWS_AS(linear_regression_r2(too_few, too_few), std::invalid_argument);
}

TEST_CASE("convergence report flags only rebounding test error", "[experiment]") {
  TrainHistory smooth;
  smooth.train_error = {0.5, 0.4, 0.3, 0.2};
  smooth.test_error = {{2, 0.45}, {4, 0.25}};
  CHECK_FALSE(convergence_report(smooth).overfit);

  TrainHistory rebound;
  rebound.train_error = {0.5, 0.4, 0.3, 0.2, 0.15, 0.1};
  rebound.test_error = {{2, 0.4}, {4, 0.2}, {6, 0.3}};
  const ConvergenceSummary summary = convergence_report(rebound);
  CHECK(summary.overfit);
  CHECK(summary.min_test == 0.2);
  CHECK(summary.final_test == 0.3);

  std::ostringstream csv;
  convergence_report(rebound, &csv);
  std::istringstream lines(csv.str());
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 6);

  TrainHistory empty;
  CHECK_THROWS_AS(convergence_report(empty), std::invalid_argument);
}

TEST_CASE("family dimension scaling preserves every other knob", "[experiment]") {
  const ParametricFamily base = chessboard(2, 1e-2);
  const ParametricFamily scaled = family_with_dimension(base, 16);
  CHECK(scaled.s == 4);
  CHECK(scaled.p == 16);
  CHECK(scaled.mu == base.mu);
  CHECK_THROWS_AS(family_with_dimension(base, 7), std::invalid_argument);

  const ParametricFamily cp = family_with_dimension(clipped_poly(2, 0.1), 10);
  CHECK(cp.k == 3);
  const ParametricFamily cv = family_with_dimension(cookies_variable(2, 0.1), 18);
  CHECK(cv.s == 3);
  const ParametricFamily tp = family_with_dimension(trig_poly(2, -1.0, 1.0), 15);
  CHECK(tp.p == 15);
  CHECK(tp.sigma == -1.0);
}

TEST_CASE("scaling configs differ only in the input width", "[experiment]") {
  ExperimentConfig base = smoke_config();
  base.family = chessboard(2, 1e-2);
  std::vector<ExperimentConfig> configs;
  for (int p : {4, 9, 16}) {
    ExperimentConfig c = base;
    c.family = family_with_dimension(base.family, p);
    configs.push_back(c);
  }
  for (const auto& c : configs) {
    CHECK(c.network.hidden_widths == base.network.hidden_widths);
    CHECK(c.network.alpha == base.network.alpha);
    CHECK(c.network.init_std == base.network.init_std);
    CHECK(c.network.seed == base.network.seed);
    CHECK(c.train.batch_size == base.train.batch_size);
    CHECK(c.train.lr == base.train.lr);
    CHECK(c.train.seed == base.train.seed);
    CHECK(c.data.seed == base.data.seed);
    CHECK(c.family.mu == base.family.mu);
    const auto arch = full_architecture(c);
    const auto base_arch = full_architecture(base);
    CHECK(std::equal(arch.begin() + 1, arch.end(), base_arch.begin() + 1));
    CHECK(arch.front() == c.family.p);
  }
}

TEST_CASE("desk smoke run produces finite errors", "[experiment][smoke]") {
  const TestcaseRun run = run_testcase_full(smoke_config());
  CHECK(std::isfinite(run.record.mean_rel_test));
  CHECK(std::isfinite(run.record.mean_rel_train));
  CHECK(run.record.mean_rel_test > 0.0);
  CHECK(run.record.max_rel_test >= run.record.mean_rel_test);
  CHECK(run.record.wall_time_s > 0.0);
  CHECK(run.record.testcase == "t1");
  CHECK(run.history.train_error.size() == 50);
}

TEST_CASE("scaling study varies only the input width", "[experiment][smoke]") {
  ExperimentConfig config = smoke_config();
  config.train.epochs = 5;
  config.data.n_train = 60;
  config.data.n_test = 20;
  const std::vector<int> p_values = {2, 5};
  const ScalingStudy study = scaling_study(config, p_values);
  REQUIRE(study.records.size() == 2);
  CHECK(study.records[0].p == 2);
  CHECK(study.records[1].p == 5);
  CHECK(study.records[0].epochs == study.records[1].epochs);
  CHECK(study.records[0].seed == study.records[1].seed);
  CHECK_FALSE(study.semilog);
  CHECK(std::isfinite(study.fit.slope));

  CHECK_THROWS_AS(scaling_study(config, std::vector<int>{2}), std::invalid_argument);
}

TEST_CASE("sample size study trains on prefixes of one dataset", "[experiment][smoke]") {
  ExperimentConfig config = smoke_config();
  config.train.epochs = 5;
  config.data.n_train = 80;
  config.data.n_test = 20;
  const std::vector<int> sizes = {20, 40, 80};
  const SampleSizeStudy study = sample_size_study(config, sizes);
  REQUIRE(study.records.size() == 3);
  CHECK(study.records[0].n_train == 20);
  CHECK(study.records[2].n_train == 80);
  CHECK(std::isfinite(study.fit.slope));
  CHECK(std::isfinite(study.fit.r2));

  const std::vector<int> not_increasing = {20, 20};
  CHECK_THROWS_AS(sample_size_study(config, not_increasing), std::invalid_argument);
  const std::vector<int> too_large = {20, 200};
  CHECK_THROWS_AS(sample_size_study(config, too_large), std::invalid_argument);
}

TEST_CASE("result CSV has the pinned column layout", "[experiment]") {
  ResultRecord rec;
  rec.testcase = "t2";
  rec.p = 9;
  rec.mu = 0.1;
  rec.s = 3;
  rec.n_train = 2000;
  rec.seed = 1;
  rec.mean_rel_train = 0.01;
  rec.mean_rel_test = 0.02;
  rec.max_rel_test = 0.09;
  rec.epochs = 2000;
  rec.wall_time_s = 12.5;

  std::ostringstream out;
  write_results_csv(std::vector<ResultRecord>{rec}, out);
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header ==
        "testcase,p,sigma,mu,r,s,k,n_train,seed,mean_rel_train,mean_rel_test,max_rel_test,epochs,"
        "wall_time_s");
  CHECK(row == "t2,9,0,0.1,0,3,0,2000,1,0.01,0.02,0.09,2000,12.5");
}
