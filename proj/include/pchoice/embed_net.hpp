#pragma once

#include "pchoice/choice_core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace pchoice {

/// Where batch normalization sits inside a hidden layer.
enum class BatchNormPlacement {
  AfterActivation,   // linear -> relu -> norm (default)
  BeforeActivation,  // linear -> norm -> relu
};

struct ArchSpec {
  int input_dim = 0;
  int hidden_layers = 0;
  int hidden_units = 0;
  int output_dim = 0;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  BatchNormPlacement bn_placement = BatchNormPlacement::AfterActivation;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_in x fan_out
  Eigen::VectorXd bias;    // fan_out
};

struct BatchNormState {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

/// All weights, biases and batch-norm state of one embedding function.
/// Deep-copyable by value for snapshotting.
struct NetworkParams {
  ArchSpec arch;
  std::vector<DenseLayer> hidden;     // arch.hidden_layers entries
  std::vector<BatchNormState> norms;  // parallel to hidden
  DenseLayer head;                    // last hidden (or input) x output_dim
};

enum class ForwardMode { Train, Inference };

struct LayerTrace {
  Eigen::MatrixXd pre;         // linear output, rows x units
  Eigen::MatrixXd norm_input;  // what batch norm saw
  Eigen::VectorXd batch_mean;
  Eigen::VectorXd batch_var;   // biased
  Eigen::MatrixXd normalized;  // (x - mean) / sqrt(var + eps)
  Eigen::MatrixXd bn_out;      // gamma * normalized + beta
  Eigen::MatrixXd out;         // layer output fed to the next layer
};

/// Per-layer cache of a train-mode forward pass, consumed by backward().
struct ForwardTrace {
  ArchSpec arch;
  Eigen::MatrixXd input;
  std::vector<LayerTrace> layers;
};

/// Gradients w.r.t. every trainable parameter (running stats are not trained).
struct BatchNormGrads {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

struct ParamGrads {
  std::vector<DenseLayer> hidden;
  std::vector<BatchNormGrads> norms;
  DenseLayer head;
};

/// Zero-mean scaled-variance init: variance 2/fan_in for the ReLU layers,
/// 1/fan_in for the linear head; biases 0; gamma 1, beta 0, running mean 0,
/// running variance 1. Deterministic given seed.
NetworkParams init_params(const ArchSpec& arch, std::uint64_t seed);
NetworkParams init_params(int input_dim, int hidden_layers, int hidden_units, int output_dim,
                          std::uint64_t seed);

/// Applies the shared network to every row of the batch. Train mode uses batch
/// statistics, updates the running statistics in place, and requires >= 2 rows.
Embedding forward(const Eigen::MatrixXd& batch, NetworkParams& params, ForwardMode mode,
                  ForwardTrace* trace = nullptr);

/// Inference-mode forward; pure, uses running statistics only.
Embedding forward_inference(const Eigen::MatrixXd& batch, const NetworkParams& params);

/// Reverse-mode gradients of a scalar loss through the network, given the
/// loss gradient w.r.t. the embedded points. The trace must come from a
/// train-mode forward with these params.
ParamGrads backward(const ForwardTrace& trace, const NetworkParams& params,
                    const Eigen::MatrixXd& grad_output);

ParamGrads zero_like(const NetworkParams& params);

/// Visits every trainable tensor of `params` and the matching tensors of the
/// gradient-shaped structures, in a fixed order. F is called as
/// f(Eigen::Map<VectorXd> param_view, views...).
template <typename F>
void for_each_tensor(NetworkParams& params, ParamGrads& a, ParamGrads& b, ParamGrads& c, F&& f) {
  auto visit = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& x, Eigen::MatrixXd& y, Eigen::MatrixXd& z) {
    f(Eigen::Map<Eigen::VectorXd>(p.data(), p.size()), Eigen::Map<Eigen::VectorXd>(x.data(), x.size()),
      Eigen::Map<Eigen::VectorXd>(y.data(), y.size()), Eigen::Map<Eigen::VectorXd>(z.data(), z.size()));
  };
  auto visit_vec = [&](Eigen::VectorXd& p, Eigen::VectorXd& x, Eigen::VectorXd& y, Eigen::VectorXd& z) {
    f(Eigen::Map<Eigen::VectorXd>(p.data(), p.size()), Eigen::Map<Eigen::VectorXd>(x.data(), x.size()),
      Eigen::Map<Eigen::VectorXd>(y.data(), y.size()), Eigen::Map<Eigen::VectorXd>(z.data(), z.size()));
  };
  for (std::size_t l = 0; l < params.hidden.size(); ++l) {
    visit(params.hidden[l].weight, a.hidden[l].weight, b.hidden[l].weight, c.hidden[l].weight);
    visit_vec(params.hidden[l].bias, a.hidden[l].bias, b.hidden[l].bias, c.hidden[l].bias);
    visit_vec(params.norms[l].gamma, a.norms[l].gamma, b.norms[l].gamma, c.norms[l].gamma);
    visit_vec(params.norms[l].beta, a.norms[l].beta, b.norms[l].beta, c.norms[l].beta);
  }
  visit(params.head.weight, a.head.weight, b.head.weight, c.head.weight);
  visit_vec(params.head.bias, a.head.bias, b.head.bias, c.head.bias);
}

}  // namespace pchoice
