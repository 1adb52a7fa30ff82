// Command-line front end: dataset generation, training, evaluation, studies,
// FEM verification, and activation conversion for network checkpoints.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ppde/ppde.hpp"

namespace {

using namespace ppde;

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      values.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what) + ": cannot parse integer list entry \"" + token + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
  return values;
}

ParametricFamily family_from_flags(const std::string& type, std::optional<int> p,
                                   std::optional<int> s, std::optional<int> k, double sigma,
                                   std::optional<double> mu, double r) {
  auto need = [](const auto& opt, const char* flag) {
    if (!opt) throw CLI::ValidationError(std::string("--") + flag + " is required for this family");
    return *opt;
  };
  if (type == "t1") return trig_poly(need(p, "p"), sigma, need(mu, "mu"));
  if (type == "t2") return chessboard(need(s, "s"), need(mu, "mu"));
  if (type == "t3f") return cookies_fixed(need(s, "s"), need(mu, "mu"), r);
  if (type == "t3v") return cookies_variable(need(s, "s"), need(mu, "mu"));
  if (type == "t4") return clipped_poly(need(k, "k"), need(mu, "mu"));
  throw CLI::ValidationError("--family must be one of t1, t2, t3f, t3v, t4");
}

void check_config_against_dataset(const ConfigFile& config, const Dataset& ds, const char* role) {
  if (config.family) {
    const ParametricFamily& a = *config.family;
    const ParametricFamily& b = ds.family;
    if (a.variant != b.variant || a.p != b.p || a.sigma != b.sigma || a.mu != b.mu || a.r != b.r ||
        a.s != b.s || a.k != b.k)
      throw ConfigError(std::string("config family does not match the ") + role + " dataset");
  }
  if (config.mesh_n && *config.mesh_n != ds.mesh_n)
    throw ConfigError(std::string("config mesh.n does not match the ") + role + " dataset");
}

std::vector<int> default_p_values(FamilyVariant variant) {
  switch (variant) {
    case FamilyVariant::TrigPoly: return {2, 5, 10, 15, 20};
    case FamilyVariant::Chessboard:
    case FamilyVariant::CookiesFixed: return {4, 9, 16, 25};
    case FamilyVariant::CookiesVariable: return {8, 18, 32, 50};
    case FamilyVariant::ClippedPoly: return {6, 10, 21, 45, 91};
  }
  return {};
}

// Manufactured-solution verification: u = sin(pi x1) sin(pi x2) with a = 1,
// H1 error integrated with a degree-5 rule, compared across one refinement.
struct VerifyResult {
  double h1_error = 0;
  double residual = 0;
};

VerifyResult verify_at(int n) {
  const auto exact = [](const Eigen::Vector2d& x) {
    return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
  };
  const auto exact_grad = [](const Eigen::Vector2d& x) -> Eigen::Vector2d {
    const double pi = std::numbers::pi;
    return {pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
            pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
  };
  const Mesh mesh = build_mesh(n);
  const std::vector<double> ones(mesh.triangles.size(), 1.0);
  const FemSystem system = assemble_system(mesh, ones, [&](const Eigen::Vector2d& x) {
    return 2.0 * std::numbers::pi * std::numbers::pi * exact(x);
  });
  const FeVector u = solve(system);

  static const double qa[7] = {1.0 / 3, 0.0597158717897698, 0.4701420641051151, 0.4701420641051151,
                               0.7974269853530873, 0.1012865073234563, 0.1012865073234563};
  static const double qb[7] = {1.0 / 3, 0.4701420641051151, 0.0597158717897698, 0.4701420641051151,
                               0.1012865073234563, 0.7974269853530873, 0.1012865073234563};
  static const double qw[7] = {9.0 / 40,           0.1323941527885062, 0.1323941527885062,
                               0.1323941527885062, 0.1259391805448271, 0.1259391805448271,
                               0.1259391805448271};

  double error_sq = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector2d& a = mesh.vertices[tri[0]];
    const Eigen::Vector2d& b = mesh.vertices[tri[1]];
    const Eigen::Vector2d& c = mesh.vertices[tri[2]];
    const double area = signed_area(mesh, tri);
    Eigen::Matrix2d edges;
    edges.row(0) = (b - a).transpose();
    edges.row(1) = (c - a).transpose();
    const Eigen::Vector2d grad_h =
        edges.inverse() * Eigen::Vector2d(u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
    double elem = 0.0;
    for (int q = 0; q < 7; ++q) {
      const double l0 = 1.0 - qa[q] - qb[q];
      const Eigen::Vector2d x = l0 * a + qa[q] * b + qb[q] * c;
      const double vh = l0 * u[tri[0]] + qa[q] * u[tri[1]] + qb[q] * u[tri[2]];
      const double diff = vh - exact(x);
      elem += qw[q] * (diff * diff + (grad_h - exact_grad(x)).squaredNorm());
    }
    error_sq += area * elem;
  }

  VerifyResult result;
  result.h1_error = std::sqrt(error_sq);
  result.residual = (system.stiffness * u - system.load).norm() / system.load.norm();
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric diffusion surrogate laboratory"};
  app.require_subcommand(1);

  // --- gen ---------------------------------------------------------------
  std::string gen_family, gen_out;
  std::optional<int> gen_p, gen_s, gen_k;
  std::optional<double> gen_mu;
  double gen_sigma = 0.0, gen_r = 0.8;
  int gen_mesh_n = 33, gen_count = 0, gen_threads = 0;
  std::uint64_t gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen", "generate a dataset of (parameter, solution) pairs");
  gen->add_option("--family", gen_family, "t1|t2|t3f|t3v|t4")->required();
  gen->add_option("--p", gen_p, "parameter dimension (t1)");
  gen->add_option("--s", gen_s, "partition side (t2, t3f, t3v)");
  gen->add_option("--k", gen_k, "polynomial degree (t4)");
  gen->add_option("--sigma", gen_sigma, "frequency weighting exponent (t1)");
  gen->add_option("--mu", gen_mu, "ellipticity shift / clipping value");
  gen->add_option("--r", gen_r, "radius factor (t3f)")->capture_default_str();
  gen->add_option("--mesh-n", gen_mesh_n, "grid points per side")->capture_default_str();
  gen->add_option("--count", gen_count, "number of samples")->required();
  gen->add_option("--seed", gen_seed, "sampling seed")->capture_default_str();
  gen->add_option("--threads", gen_threads, "worker threads (0 = all cores)");
  gen->add_option("--out", gen_out, "output dataset path")->required();

  // --- train ---------------------------------------------------------------
  std::string train_data, train_test_data, train_config_path, train_checkpoint, train_history;
  int train_threads = 0;
  CLI::App* train_cmd = app.add_subcommand("train", "train a network on a dataset");
  train_cmd->add_option("--data", train_data, "training dataset")->required();
  train_cmd->add_option("--test-data", train_test_data, "test dataset for checkpoint errors");
  train_cmd->add_option("--config", train_config_path, "JSON experiment config")->required();
  train_cmd->add_option("--checkpoint", train_checkpoint, "output network checkpoint")->required();
  train_cmd->add_option("--history", train_history, "per-epoch CSV (epoch,mean_rel_train[,mean_rel_test])");
  train_cmd->add_option("--threads", train_threads, "worker threads for dataset generation");

  // --- eval ----------------------------------------------------------------
  std::string eval_checkpoint, eval_data;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  eval_cmd->add_option("--data", eval_data)->required();

  // --- study ----------------------------------------------------------------
  CLI::App* study = app.add_subcommand("study", "scaling and sample-size studies");
  study->require_subcommand(1);
  std::string scaling_config, scaling_out, scaling_p_values;
  int study_threads = 0;
  CLI::App* scaling = study->add_subcommand("scaling", "sweep the parameter dimension");
  scaling->add_option("--config", scaling_config)->required();
  scaling->add_option("--out", scaling_out, "results CSV")->required();
  scaling->add_option("--p-values", scaling_p_values, "comma-separated dimensions (default: paper grid)");
  scaling->add_option("--threads", study_threads, "worker threads for dataset generation");

  std::string samples_config, samples_out, samples_sizes = "500,1000,1500,2000";
  int samples_threads = 0;
  CLI::App* samples = study->add_subcommand("samples", "sweep the training set size");
  samples->add_option("--config", samples_config)->required();
  samples->add_option("--out", samples_out, "results CSV")->required();
  samples->add_option("--sizes", samples_sizes, "comma-separated training sizes")->capture_default_str();
  samples->add_option("--threads", samples_threads, "worker threads for dataset generation");

  // --- fem verify -------------------------------------------------------------
  CLI::App* fem = app.add_subcommand("fem", "finite element checks");
  fem->require_subcommand(1);
  int verify_n = 17;
  CLI::App* verify = fem->add_subcommand("verify", "manufactured-solution convergence check");
  verify->add_option("--mesh-n", verify_n, "coarse grid side (refined run uses 2(n-1)+1)")->capture_default_str();

  // --- net convert -------------------------------------------------------------
  CLI::App* net = app.add_subcommand("net", "network checkpoint utilities");
  net->require_subcommand(1);
  std::string convert_in, convert_out, convert_direction;
  double convert_alpha = 0.2;
  CLI::App* convert = net->add_subcommand("convert", "activation conversion between ReLU and LReLU");
  convert->add_option("--in", convert_in)->required();
  convert->add_option("--alpha", convert_alpha, "target slope for to-lrelu")->capture_default_str();
  convert->add_option("--direction", convert_direction, "to-relu|to-lrelu")->required();
  convert->add_option("--out", convert_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ParametricFamily family =
          family_from_flags(gen_family, gen_p, gen_s, gen_k, gen_sigma, gen_mu, gen_r);
      const Dataset ds = generate(family, gen_mesh_n, gen_count, gen_seed, gen_threads);
      save(ds, gen_out);
      std::printf("wrote %s: family=%s p=%d mesh_n=%d D=%d count=%d seed=%llu\n", gen_out.c_str(),
                  variant_name(family.variant).c_str(), family.p, ds.mesh_n, ds.D, ds.count(),
                  static_cast<unsigned long long>(ds.seed));
    } else if (*train_cmd) {
      const ConfigFile config = load_config(train_config_path);
      if (!config.network || !config.train)
        throw ConfigError("config: sections \"network\" and \"train\" required for training");
      const Dataset ds = load(train_data);
      check_config_against_dataset(config, ds, "training");
      std::optional<Dataset> test_ds;
      if (!train_test_data.empty()) {
        test_ds = load(train_test_data);
        check_config_against_dataset(config, *test_ds, "test");
        if (test_ds->mesh_n != ds.mesh_n) throw ConfigError("test dataset mesh differs from training mesh");
      }

      const Mesh mesh = build_mesh(ds.mesh_n);
      const SparseMatrix gram = assemble_gram(mesh);
      std::vector<int> arch;
      arch.push_back(ds.family.p);
      for (int w : config.network->hidden_widths) arch.push_back(w);
      arch.push_back(ds.D);
      Network model = init_network(arch, config.network->init_std, config.network->seed,
                                   config.network->alpha);

      std::ofstream history_out;
      TrainOptions options;
      if (test_ds) options.test = &*test_ds;
      if (!train_history.empty()) {
        history_out.open(train_history);
        if (!history_out) throw std::runtime_error("cannot open history file " + train_history);
        options.csv = &history_out;
      }
      const TrainHistory history = train(model, ds, gram, *config.train, options);
      save_network(model, train_checkpoint);

      std::printf("trained %d epochs: mean_rel_train=%.6g", config.train->epochs,
                  history.train_error.back());
      if (test_ds) {
        const ConvergenceSummary summary = convergence_report(history);
        std::printf(" mean_rel_test=%.6g overfit=%s", summary.final_test,
                    summary.overfit ? "yes" : "no");
      }
      std::printf("\ncheckpoint written to %s\n", train_checkpoint.c_str());
    } else if (*eval_cmd) {
      const Network model = load_network(eval_checkpoint);
      const Dataset ds = load(eval_data);
      const Mesh mesh = build_mesh(ds.mesh_n);
      const EvalResult result = evaluate(model, ds, assemble_gram(mesh));
      std::printf("n=%d mean_rel_error=%.6g max_rel_error=%.6g\n", ds.count(), result.mean,
                  result.max);
    } else if (*scaling) {
      const ExperimentConfig base = load_config(scaling_config).experiment("study scaling");
      const std::vector<int> p_values = scaling_p_values.empty()
                                            ? default_p_values(base.family.variant)
                                            : parse_int_list(scaling_p_values, "--p-values");
      const ScalingStudy result = scaling_study(base, p_values, study_threads);
      std::ofstream out(scaling_out);
      if (!out) throw std::runtime_error("cannot open " + scaling_out);
      write_results_csv(result.records, out);
      std::printf("wrote %s (%zu runs)\n", scaling_out.c_str(), result.records.size());
      std::printf("%s fit: slope=%.4g intercept=%.4g r2=%.4g\n",
                  result.semilog ? "semilog" : "loglog", result.fit.slope, result.fit.intercept,
                  result.fit.r2);
    } else if (*samples) {
      const ExperimentConfig base = load_config(samples_config).experiment("study samples");
      const std::vector<int> sizes = parse_int_list(samples_sizes, "--sizes");
      const SampleSizeStudy result = sample_size_study(base, sizes, samples_threads);
      std::ofstream out(samples_out);
      if (!out) throw std::runtime_error("cannot open " + samples_out);
      write_results_csv(result.records, out);
      std::printf("wrote %s (%zu runs)\n", samples_out.c_str(), result.records.size());
      std::printf("error ~ size fit: slope=%.4g intercept=%.4g r2=%.4g\n", result.fit.slope,
                  result.fit.intercept, result.fit.r2);
    } else if (*verify) {
      const int fine_n = 2 * (verify_n - 1) + 1;
      const VerifyResult coarse = verify_at(verify_n);
      const VerifyResult fine = verify_at(fine_n);
      const double ratio = coarse.h1_error / fine.h1_error;
      std::printf("n=%d: H1 error %.6g, residual %.3g\n", verify_n, coarse.h1_error, coarse.residual);
      std::printf("n=%d: H1 error %.6g, residual %.3g\n", fine_n, fine.h1_error, fine.residual);
      std::printf("ratio %.4g (first-order elements: expect about 2)\n", ratio);
      const bool pass =
          ratio > 1.7 && ratio < 2.3 && coarse.residual <= 1e-10 && fine.residual <= 1e-10;
      std::printf("%s\n", pass ? "PASS" : "FAIL");
      return pass ? 0 : 1;
    } else if (*convert) {
      const Network model = load_network(convert_in);
      Network converted;
      if (convert_direction == "to-relu") {
        converted = convert_lrelu_to_relu(model);
      } else if (convert_direction == "to-lrelu") {
        converted = convert_relu_to_lrelu(model, convert_alpha);
      } else {
        throw CLI::ValidationError("--direction must be to-relu or to-lrelu");
      }
      save_network(converted, convert_out);
      const NetworkCounts before = counts(model), after = counts(converted);
      std::printf("converted %s -> %s: alpha %.3g -> %.3g, M %lld -> %lld\n", convert_in.c_str(),
                  convert_out.c_str(), model.alpha, converted.alpha,
                  static_cast<long long>(before.weights), static_cast<long long>(after.weights));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
