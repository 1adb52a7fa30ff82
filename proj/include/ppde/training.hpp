#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppde/dataset.hpp"
#include "ppde/fem.hpp"
#include "ppde/network.hpp"
#include "ppde/rng.hpp"

namespace ppde {

struct TrainConfig {
  int batch_size = 256;
  double lr = 2.0e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1.0e-8;
  int epochs = 1;
  std::uint64_t seed = 0;  // per-epoch shuffling
  double init_std = 0.1;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdamState {
  std::vector<Layer> m;
  std::vector<Layer> v;
  std::int64_t t = 0;
};

inline AdamState make_adam_state(const Network& net) {
  AdamState state;
  state.m.reserve(net.layers.size());
  state.v.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    state.m.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                       Eigen::VectorXd::Zero(layer.bias.size())});
    state.v.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                       Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return state;
}

struct TrainHistory {
  std::vector<double> train_error;                    // one entry per epoch
  std::vector<std::pair<int, double>> test_error;     // (epoch, error) checkpoints
};

struct EvalResult {
  double mean = 0.0;
  double max = 0.0;
};

// Training data in column form: Y is p x N, U is D x N, u_norms[i] = |u_i|_G.
struct ColumnData {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd U;
  Eigen::VectorXd u_norms;

  int count() const { return static_cast<int>(Y.cols()); }
};

inline ColumnData to_columns(const Dataset& ds, const SparseMatrix& gram) {
  ColumnData data;
  const int N = ds.count();
  if (N == 0) throw std::invalid_argument("to_columns: empty dataset");
  data.Y.resize(ds.family.p, N);
  data.U.resize(ds.D, N);
  for (int i = 0; i < N; ++i) {
    data.Y.col(i) = ds.records[i].y;
    data.U.col(i) = ds.records[i].u;
  }
  data.u_norms.resize(N);
  for (int i = 0; i < N; ++i) {
    data.u_norms[i] = gram_norm(ds.records[i].u, gram);
    if (data.u_norms[i] == 0.0)
      throw std::domain_error("to_columns: record " + std::to_string(i) + " has zero Gram norm");
  }
  return data;
}

// Mean of |R(net)(y_i) - u_i|_G / |u_i|_G over the batch, with exact
// gradients. d|v|_G/dv = G v / |v|_G, so the upstream gradient per sample is
// G (v - u) / (|v - u|_G |u|_G B).
inline std::pair<double, Gradients> loss_and_grad(const Network& net, const Eigen::MatrixXd& Y,
                                                  const Eigen::MatrixXd& U,
                                                  const Eigen::VectorXd& u_norms,
                                                  const SparseMatrix& gram) {
  const int B = static_cast<int>(Y.cols());
  if (B == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (U.cols() != B || u_norms.size() != B)
    throw std::invalid_argument("loss_and_grad: batch shapes disagree");
  if (U.rows() != net.output_dim())
    throw std::invalid_argument("loss_and_grad: target dimension does not match the network output");

  ForwardCache cache = forward_cached(net, Y);
  Eigen::MatrixXd residual = cache.output - U;
  Eigen::MatrixXd g_residual = gram * residual;

  double loss = 0.0;
  Eigen::MatrixXd upstream(residual.rows(), B);
  for (int i = 0; i < B; ++i) {
    if (u_norms[i] == 0.0) throw std::domain_error("loss_and_grad: reference with zero Gram norm");
    const double err = std::sqrt(std::max(residual.col(i).dot(g_residual.col(i)), 0.0));
    loss += err / u_norms[i];
    if (err > 0.0) {
      upstream.col(i) = g_residual.col(i) / (err * u_norms[i] * B);
    } else {
      upstream.col(i).setZero();
    }
  }
  loss /= B;
  return {loss, backward_batch(net, cache, upstream)};
}

inline std::pair<double, Gradients> loss_and_grad(const Network& net,
                                                  const std::vector<DatasetRecord>& batch,
                                                  const SparseMatrix& gram) {
  const int B = static_cast<int>(batch.size());
  if (B == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  Eigen::MatrixXd Y(batch.front().y.size(), B), U(batch.front().u.size(), B);
  Eigen::VectorXd norms(B);
  for (int i = 0; i < B; ++i) {
    Y.col(i) = batch[i].y;
    U.col(i) = batch[i].u;
    norms[i] = gram_norm(batch[i].u, gram);
  }
  return loss_and_grad(net, Y, U, norms, gram);
}

// One ADAM update with bias correction, applied in place.
inline void adam_step(Network& net, AdamState& state, const Gradients& grads,
                      const TrainConfig& config) {
  if (state.m.size() != net.layers.size() || grads.layers.size() != net.layers.size())
    throw std::invalid_argument("adam_step: state/gradient shapes disagree");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto apply = [&](auto& theta, auto& m, auto& v, const auto& g) {
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
      theta.array() -= config.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
    };
    apply(net.layers[l].weights, state.m[l].weights, state.v[l].weights, grads.layers[l].weights);
    apply(net.layers[l].bias, state.m[l].bias, state.v[l].bias, grads.layers[l].bias);
  }
}

// Mean and max relative error over column data, evaluated in chunks.
inline EvalResult evaluate(const Network& net, const ColumnData& data, const SparseMatrix& gram,
                           int chunk = 512) {
  if (data.Y.rows() != net.input_dim() || data.U.rows() != net.output_dim())
    throw std::invalid_argument("evaluate: network and dataset dimensions disagree");
  const int N = data.count();
  EvalResult result;
  for (int start = 0; start < N; start += chunk) {
    const int B = std::min(chunk, N - start);
    const Eigen::MatrixXd out = realize_batch(net, data.Y.middleCols(start, B));
    const Eigen::MatrixXd residual = out - data.U.middleCols(start, B);
    const Eigen::MatrixXd g_residual = gram * residual;
    for (int i = 0; i < B; ++i) {
      const double err =
          std::sqrt(std::max(residual.col(i).dot(g_residual.col(i)), 0.0)) / data.u_norms[start + i];
      result.mean += err;
      result.max = std::max(result.max, err);
    }
  }
  result.mean /= N;
  return result;
}

inline EvalResult evaluate(const Network& net, const Dataset& ds, const SparseMatrix& gram) {
  if (ds.records.empty()) throw std::invalid_argument("evaluate: empty dataset");
  return evaluate(net, to_columns(ds, gram), gram);
}

struct TrainOptions {
  const Dataset* test = nullptr;   // optional test set for checkpoint errors
  int checkpoint_every = 50;       // epochs between test evaluations
  std::ostream* csv = nullptr;     // per-epoch rows: epoch,mean_rel_train[,mean_rel_test]
};

// Batch gradient descent with ADAM: full passes in seed-derived shuffle
// order, final partial batch included, full training-error pass per epoch.
inline TrainHistory train(Network& net, const Dataset& train_ds, const SparseMatrix& gram,
                          const TrainConfig& config, const TrainOptions& options = {}) {
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be positive");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch size must be positive");
  if (train_ds.family.p != net.input_dim() || train_ds.D != net.output_dim())
    throw std::invalid_argument("train: network and dataset dimensions disagree");

  const ColumnData data = to_columns(train_ds, gram);
  ColumnData test_data;
  if (options.test) test_data = to_columns(*options.test, gram);

  const int N = data.count();
  AdamState state = make_adam_state(net);
  TrainHistory history;
  history.train_error.reserve(config.epochs);

  Eigen::MatrixXd batch_y, batch_u;
  Eigen::VectorXd batch_norms;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<int> order =
        random_permutation(N, mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    for (int start = 0, batch_index = 0; start < N; start += config.batch_size, ++batch_index) {
      const int B = std::min(config.batch_size, N - start);
      batch_y.resize(data.Y.rows(), B);
      batch_u.resize(data.U.rows(), B);
      batch_norms.resize(B);
      for (int i = 0; i < B; ++i) {
        const int idx = order[start + i];
        batch_y.col(i) = data.Y.col(idx);
        batch_u.col(i) = data.U.col(idx);
        batch_norms[i] = data.u_norms[idx];
      }
      auto [loss, grads] = loss_and_grad(net, batch_y, batch_u, batch_norms, gram);
      if (!std::isfinite(loss))
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch_index));
      adam_step(net, state, grads, config);
    }

    const double train_error = evaluate(net, data, gram).mean;
    if (!std::isfinite(train_error))
      throw DivergenceError("train: non-finite training error at epoch " + std::to_string(epoch));
    history.train_error.push_back(train_error);

    bool checkpointed = false;
    if (options.test && (epoch % options.checkpoint_every == 0 || epoch == config.epochs)) {
      history.test_error.emplace_back(epoch, evaluate(net, test_data, gram).mean);
      checkpointed = true;
    }
    if (options.csv) {
      (*options.csv) << epoch << ',' << train_error;
      if (checkpointed) (*options.csv) << ',' << history.test_error.back().second;
      (*options.csv) << '\n';
    }
  }
  return history;
}

}  // namespace ppde
