#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppde/rng.hpp"

namespace ppde {

struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

// A network is the plain list of layer parameters plus the LReLU slope used
// by its realization: hidden layers apply rho_alpha(t) = max{t, alpha t},
// the final layer stays affine.
struct Network {
  std::vector<Layer> layers;
  double alpha = 0.0;

  int depth() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weights.rows()); }

  std::vector<int> architecture() const {
    std::vector<int> dims;
    dims.reserve(layers.size() + 1);
    dims.push_back(input_dim());
    for (const auto& layer : layers) dims.push_back(static_cast<int>(layer.weights.rows()));
    return dims;
  }
};

struct NetworkCounts {
  std::int64_t weights = 0;  // M: non-zero entries over all matrices and biases
  std::int64_t neurons = 0;  // N: N_0 + ... + N_L
  int layers = 0;            // L
};

inline void check_shapes(const Network& net) {
  if (net.layers.empty()) throw std::invalid_argument("network: at least one layer required");
  if (!(net.alpha >= 0.0 && net.alpha < 1.0))
    throw std::invalid_argument("network: alpha must lie in [0,1)");
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l)
    if (net.layers[l + 1].weights.cols() != net.layers[l].weights.rows())
      throw std::invalid_argument("network: layer shapes do not chain at layer " + std::to_string(l + 1));
  for (const auto& layer : net.layers)
    if (layer.bias.size() != layer.weights.rows())
      throw std::invalid_argument("network: bias length must match matrix rows");
}

// All weights and biases i.i.d. normal(0, std^2); matrices are filled row by
// row, then the bias, so the draw order is part of the seed contract.
inline Network init_network(const std::vector<int>& architecture, double std, std::uint64_t seed,
                            double alpha = 0.0) {
  if (architecture.size() < 2) throw std::invalid_argument("init_network: architecture needs >= 2 entries");
  for (int dim : architecture)
    if (dim < 1) throw std::invalid_argument("init_network: layer sizes must be positive");
  NormalSampler draw(seed);
  Network net;
  net.alpha = alpha;
  net.layers.resize(architecture.size() - 1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    layer.weights.resize(architecture[l + 1], architecture[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = std * draw();
    layer.bias.resize(architecture[l + 1]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = std * draw();
  }
  return net;
}

// Forward pass over a batch stored column-wise; a single input is the B = 1 case.
inline Eigen::MatrixXd realize_batch(const Network& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim())
    throw std::invalid_argument("realize: input dimension mismatch");
  Eigen::MatrixXd x = inputs;
  for (int l = 0; l < net.depth(); ++l) {
    Eigen::MatrixXd z = net.layers[l].weights * x;
    z.colwise() += net.layers[l].bias;
    if (l + 1 < net.depth()) z = z.array().max(net.alpha * z.array()).matrix();
    x = std::move(z);
  }
  return x;
}

inline Eigen::VectorXd realize(const Network& net, const Eigen::VectorXd& input) {
  return realize_batch(net, input);
}

inline NetworkCounts counts(const Network& net) {
  NetworkCounts c;
  c.layers = net.depth();
  c.neurons = net.input_dim();
  for (const auto& layer : net.layers) {
    c.neurons += layer.weights.rows();
    c.weights += (layer.weights.array() != 0.0).count();
    c.weights += (layer.bias.array() != 0.0).count();
  }
  return c;
}

namespace detail {

// Row interleaving (v_1, -v_1, v_2, -v_2, ...): left factor of the
// duplication map used by both activation conversions.
inline Eigen::MatrixXd interleave_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(2 * m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.row(2 * i) = m.row(i);
    out.row(2 * i + 1) = -m.row(i);
  }
  return out;
}

inline Eigen::VectorXd interleave_rows(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[2 * i] = v[i];
    out[2 * i + 1] = -v[i];
  }
  return out;
}

// Right factor: column j of m lands in columns (2j, 2j+1) scaled by (c0, c1),
// i.e. m times the recombination map (x_1, x_2, ...) -> (c0 x_1 + c1 x_2, ...).
inline Eigen::MatrixXd recombine_cols(const Eigen::MatrixXd& m, double c0, double c1) {
  Eigen::MatrixXd out(m.rows(), 2 * m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out.col(2 * j) = c0 * m.col(j);
    out.col(2 * j + 1) = c1 * m.col(j);
  }
  return out;
}

inline Network convert_activation(const Network& net, double c0, double c1, double result_alpha) {
  Network out;
  out.alpha = result_alpha;
  const int L = net.depth();
  if (L == 1) {
    // No hidden activations; the realization is affine either way.
    out.layers = net.layers;
    return out;
  }
  out.layers.reserve(L);
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd w = net.layers[l].weights;
    if (l > 0) w = recombine_cols(w, c0, c1);
    if (l + 1 < L) {
      out.layers.push_back({interleave_rows(w), interleave_rows(net.layers[l].bias)});
    } else {
      out.layers.push_back({std::move(w), net.layers[l].bias});
    }
  }
  return out;
}

}  // namespace detail

// Given a net meant for the ReLU, builds one whose alpha-LReLU realization
// coincides with it, using rho_0(x) = (rho_a(x) + a rho_a(-x)) / (1 - a^2).
// Hidden widths double; M grows by at most a factor of 4.
inline Network convert_relu_to_lrelu(const Network& net, double alpha) {
  check_shapes(net);
  if (net.alpha != 0.0)
    throw std::invalid_argument("convert_relu_to_lrelu: source network must have alpha = 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("convert_relu_to_lrelu: target alpha must lie in (0,1)");
  const double scale = 1.0 / (1.0 - alpha * alpha);
  return detail::convert_activation(net, scale, alpha * scale, alpha);
}

// Inverse direction, using rho_a(x) = rho_0(x) - a rho_0(-x).
inline Network convert_lrelu_to_relu(const Network& net) {
  check_shapes(net);
  if (!(net.alpha > 0.0 && net.alpha < 1.0))
    throw std::invalid_argument("convert_lrelu_to_relu: source alpha must lie in (0,1)");
  return detail::convert_activation(net, 1.0, -net.alpha, 0.0);
}

// ---------------------------------------------------------------------------
// Backpropagation

struct Gradients {
  std::vector<Layer> layers;  // same shapes as the network
};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // x_0, ..., x_{L-1} (post-activation)
  Eigen::MatrixXd output;                    // x_L
};

inline ForwardCache forward_cached(const Network& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  ForwardCache cache;
  cache.activations.reserve(net.depth());
  cache.activations.push_back(inputs);
  for (int l = 0; l < net.depth(); ++l) {
    Eigen::MatrixXd z = net.layers[l].weights * cache.activations.back();
    z.colwise() += net.layers[l].bias;
    if (l + 1 < net.depth()) {
      cache.activations.push_back(z.array().max(net.alpha * z.array()).matrix());
    } else {
      cache.output = std::move(z);
    }
  }
  return cache;
}

// Exact reverse-mode gradients of upstream^T . realization(x), summed over the
// batch columns. The LReLU derivative at 0 is taken as alpha.
inline Gradients backward_batch(const Network& net, const ForwardCache& cache,
                                const Eigen::MatrixXd& upstream) {
  const int L = net.depth();
  if (upstream.rows() != net.output_dim() || upstream.cols() != cache.output.cols())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  Gradients grads;
  grads.layers.resize(L);
  Eigen::MatrixXd delta = upstream;
  for (int l = L - 1; l >= 0; --l) {
    grads.layers[l].weights.noalias() = delta * cache.activations[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = net.layers[l].weights.transpose() * delta;
      // x_l > 0 iff the pre-activation was positive (alpha < 1 keeps signs).
      const auto positive = cache.activations[l].array() > 0.0;
      delta = (positive.select(back.array(), net.alpha * back.array())).matrix();
    }
  }
  return grads;
}

inline Gradients backward(const Network& net, const Eigen::VectorXd& input,
                          const Eigen::VectorXd& upstream_grad) {
  return backward_batch(net, forward_cached(net, input), upstream_grad);
}

// ---------------------------------------------------------------------------
// Checkpoint files: "PNET", version u32, alpha f64, L u32, architecture
// (L+1 x u32), then per layer the row-major f64 matrix and the bias.

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void save_network(const Network& net, const std::filesystem::path& path) {
  check_shapes(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_network: cannot open " + path.string());
  auto write = [&out](const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  };
  write("PNET", 4);
  const std::uint32_t version = 1;
  write(&version, 4);
  write(&net.alpha, 8);
  const std::uint32_t L = static_cast<std::uint32_t>(net.depth());
  write(&L, 4);
  for (int dim : net.architecture()) {
    const std::uint32_t d = static_cast<std::uint32_t>(dim);
    write(&d, 4);
  }
  for (const auto& layer : net.layers) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        const double v = layer.weights(i, j);
        write(&v, 8);
      }
    write(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()) * 8);
  }
  if (!out) throw std::runtime_error("save_network: write failed for " + path.string());
}

inline Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_network: cannot open " + path.string());
  auto read = [&in, &path](void* data, std::size_t size) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (!in) throw CheckpointError("truncated checkpoint " + path.string());
  };
  char magic[4];
  read(magic, 4);
  if (std::memcmp(magic, "PNET", 4) != 0) throw CheckpointError("bad checkpoint magic in " + path.string());
  std::uint32_t version = 0;
  read(&version, 4);
  if (version != 1) throw CheckpointError("unsupported checkpoint version");
  Network net;
  read(&net.alpha, 8);
  std::uint32_t L = 0;
  read(&L, 4);
  if (L < 1 || L > 1u << 20) throw CheckpointError("implausible layer count");
  std::vector<std::uint32_t> dims(L + 1);
  for (auto& d : dims) {
    read(&d, 4);
    if (d < 1) throw CheckpointError("invalid architecture entry");
  }
  net.layers.resize(L);
  for (std::uint32_t l = 0; l < L; ++l) {
    Layer& layer = net.layers[l];
    layer.weights.resize(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) read(&layer.weights(i, j), 8);
    layer.bias.resize(dims[l + 1]);
    read(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()) * 8);
  }
  check_shapes(net);
  return net;
}

}  // namespace ppde
