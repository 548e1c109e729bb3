#include "pchoice/embed_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pchoice {

namespace {

void check_arch(const ArchSpec& arch) {
  if (arch.input_dim < 1 || arch.output_dim < 1 || arch.hidden_layers < 0 ||
      (arch.hidden_layers > 0 && arch.hidden_units < 1)) {
    throw std::invalid_argument("init_params: dimensions must be positive");
  }
  if (arch.bn_epsilon <= 0.0) {
    throw std::invalid_argument("init_params: bn_epsilon must be > 0");
  }
}

DenseLayer gaussian_layer(int fan_in, int fan_out, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  DenseLayer layer;
  layer.weight.resize(fan_in, fan_out);
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      layer.weight(r, c) = dist(rng);
    }
  }
  layer.bias = Eigen::VectorXd::Zero(fan_out);
  return layer;
}

struct NormResult {
  Eigen::MatrixXd out;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::MatrixXd normalized;
};

NormResult batch_norm(const Eigen::MatrixXd& x, const ArchSpec& arch, const BatchNormState& state,
                      ForwardMode mode, BatchNormState* update) {
  NormResult r;
  const double n = static_cast<double>(x.rows());
  if (mode == ForwardMode::Train) {
    r.mean = x.colwise().mean();
    r.var = (x.rowwise() - r.mean.transpose()).array().square().colwise().sum() / n;
    // Biased variance normalizes the batch; the unbiased one feeds the EMA.
    Eigen::VectorXd unbiased = r.var * (n / (n - 1.0));
    update->running_mean =
        (1.0 - arch.bn_momentum) * state.running_mean + arch.bn_momentum * r.mean;
    update->running_var =
        (1.0 - arch.bn_momentum) * state.running_var + arch.bn_momentum * unbiased;
  } else {
    r.mean = state.running_mean;
    r.var = state.running_var;
  }
  Eigen::ArrayXd inv_std = (r.var.array() + arch.bn_epsilon).sqrt().inverse();
  r.normalized = (x.rowwise() - r.mean.transpose()).array().rowwise() * inv_std.transpose();
  r.out = (r.normalized.array().rowwise() * state.gamma.transpose().array()).rowwise() +
          state.beta.transpose().array();
  return r;
}

Embedding forward_impl(const Eigen::MatrixXd& batch, const NetworkParams& params, ForwardMode mode,
                       ForwardTrace* trace, NetworkParams* update_target) {
  const ArchSpec& arch = params.arch;
  if (batch.cols() != arch.input_dim) {
    throw std::invalid_argument("forward: batch has " + std::to_string(batch.cols()) +
                                " columns, network expects " + std::to_string(arch.input_dim));
  }
  if (mode == ForwardMode::Train && batch.rows() < 2) {
    throw std::invalid_argument("forward: train mode needs at least 2 rows for batch statistics");
  }
  if (trace) {
    trace->arch = arch;
    trace->input = batch;
    trace->layers.clear();
    trace->layers.reserve(params.hidden.size());
  }
  Eigen::MatrixXd a = batch;
  for (std::size_t l = 0; l < params.hidden.size(); ++l) {
    BatchNormState* update = update_target ? &update_target->norms[l] : nullptr;
    LayerTrace lt;
    lt.pre = (a * params.hidden[l].weight).rowwise() + params.hidden[l].bias.transpose();
    if (arch.bn_placement == BatchNormPlacement::AfterActivation) {
      lt.norm_input = lt.pre.cwiseMax(0.0);
      NormResult nr = batch_norm(lt.norm_input, arch, params.norms[l], mode, update);
      lt.batch_mean = nr.mean;
      lt.batch_var = nr.var;
      lt.normalized = std::move(nr.normalized);
      lt.bn_out = std::move(nr.out);
      lt.out = lt.bn_out;
    } else {
      lt.norm_input = lt.pre;
      NormResult nr = batch_norm(lt.norm_input, arch, params.norms[l], mode, update);
      lt.batch_mean = nr.mean;
      lt.batch_var = nr.var;
      lt.normalized = std::move(nr.normalized);
      lt.bn_out = std::move(nr.out);
      lt.out = lt.bn_out.cwiseMax(0.0);
    }
    a = lt.out;
    if (trace) trace->layers.push_back(std::move(lt));
  }
  return (a * params.head.weight).rowwise() + params.head.bias.transpose();
}

}  // namespace

NetworkParams init_params(const ArchSpec& arch, std::uint64_t seed) {
  check_arch(arch);
  std::mt19937_64 rng(seed);
  NetworkParams params;
  params.arch = arch;
  int fan_in = arch.input_dim;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    params.hidden.push_back(gaussian_layer(fan_in, arch.hidden_units, 2.0 / fan_in, rng));
    BatchNormState bn;
    bn.gamma = Eigen::VectorXd::Ones(arch.hidden_units);
    bn.beta = Eigen::VectorXd::Zero(arch.hidden_units);
    bn.running_mean = Eigen::VectorXd::Zero(arch.hidden_units);
    bn.running_var = Eigen::VectorXd::Ones(arch.hidden_units);
    params.norms.push_back(std::move(bn));
    fan_in = arch.hidden_units;
  }
  params.head = gaussian_layer(fan_in, arch.output_dim, 1.0 / fan_in, rng);
  return params;
}

NetworkParams init_params(int input_dim, int hidden_layers, int hidden_units, int output_dim,
                          std::uint64_t seed) {
  ArchSpec arch;
  arch.input_dim = input_dim;
  arch.hidden_layers = hidden_layers;
  arch.hidden_units = hidden_units;
  arch.output_dim = output_dim;
  return init_params(arch, seed);
}

Embedding forward(const Eigen::MatrixXd& batch, NetworkParams& params, ForwardMode mode,
                  ForwardTrace* trace) {
  return forward_impl(batch, params, mode, trace, mode == ForwardMode::Train ? &params : nullptr);
}

Embedding forward_inference(const Eigen::MatrixXd& batch, const NetworkParams& params) {
  return forward_impl(batch, params, ForwardMode::Inference, nullptr, nullptr);
}

ParamGrads zero_like(const NetworkParams& params) {
  ParamGrads g;
  for (std::size_t l = 0; l < params.hidden.size(); ++l) {
    DenseLayer dl;
    dl.weight = Eigen::MatrixXd::Zero(params.hidden[l].weight.rows(), params.hidden[l].weight.cols());
    dl.bias = Eigen::VectorXd::Zero(params.hidden[l].bias.size());
    g.hidden.push_back(std::move(dl));
    BatchNormGrads bg;
    bg.gamma = Eigen::VectorXd::Zero(params.norms[l].gamma.size());
    bg.beta = Eigen::VectorXd::Zero(params.norms[l].beta.size());
    g.norms.push_back(std::move(bg));
  }
  g.head.weight = Eigen::MatrixXd::Zero(params.head.weight.rows(), params.head.weight.cols());
  g.head.bias = Eigen::VectorXd::Zero(params.head.bias.size());
  return g;
}

namespace {

// Backward through y = gamma * (x - mu) / sqrt(var + eps) + beta where mu and
// the biased var are batch statistics of x itself.
Eigen::MatrixXd batch_norm_backward(const LayerTrace& lt, const BatchNormState& state, double eps,
                                    const Eigen::MatrixXd& dy, BatchNormGrads& out) {
  const double n = static_cast<double>(dy.rows());
  out.gamma = (dy.array() * lt.normalized.array()).colwise().sum();
  out.beta = dy.colwise().sum();
  Eigen::MatrixXd dxhat = dy.array().rowwise() * state.gamma.transpose().array();
  Eigen::RowVectorXd mean_dxhat = dxhat.colwise().mean();
  Eigen::RowVectorXd mean_dxhat_xhat = (dxhat.array() * lt.normalized.array()).colwise().sum() / n;
  Eigen::ArrayXd inv_std = (lt.batch_var.array() + eps).sqrt().inverse();
  Eigen::MatrixXd dx = ((dxhat.rowwise() - mean_dxhat).array() -
                        lt.normalized.array().rowwise() * mean_dxhat_xhat.array())
                           .rowwise() *
                       inv_std.transpose();
  return dx;
}

}  // namespace

ParamGrads backward(const ForwardTrace& trace, const NetworkParams& params,
                    const Eigen::MatrixXd& grad_output) {
  const ArchSpec& arch = params.arch;
  if (trace.layers.size() != params.hidden.size() || trace.input.cols() != arch.input_dim ||
      grad_output.rows() != trace.input.rows() || grad_output.cols() != arch.output_dim) {
    throw std::invalid_argument("backward: trace does not match params and gradient shapes");
  }
  for (std::size_t l = 0; l < params.hidden.size(); ++l) {
    if (trace.layers[l].out.cols() != params.hidden[l].weight.cols()) {
      throw std::invalid_argument("backward: trace layer width mismatch");
    }
  }

  ParamGrads grads = zero_like(params);
  const Eigen::MatrixXd& last_act =
      params.hidden.empty() ? trace.input : trace.layers.back().out;
  grads.head.weight = last_act.transpose() * grad_output;
  grads.head.bias = grad_output.colwise().sum();
  Eigen::MatrixXd da = grad_output * params.head.weight.transpose();

  for (int l = static_cast<int>(params.hidden.size()) - 1; l >= 0; --l) {
    const LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];
    Eigen::MatrixXd dpre;
    if (arch.bn_placement == BatchNormPlacement::AfterActivation) {
      Eigen::MatrixXd dh = batch_norm_backward(lt, params.norms[static_cast<std::size_t>(l)],
                                               arch.bn_epsilon, da,
                                               grads.norms[static_cast<std::size_t>(l)]);
      // ReLU'(0) = 0, matching the hinge convention in the losses.
      dpre = (lt.pre.array() > 0.0).select(dh, 0.0);
    } else {
      Eigen::MatrixXd dnorm_out = (lt.bn_out.array() > 0.0).select(da, 0.0);
      dpre = batch_norm_backward(lt, params.norms[static_cast<std::size_t>(l)], arch.bn_epsilon,
                                 dnorm_out, grads.norms[static_cast<std::size_t>(l)]);
    }
    const Eigen::MatrixXd& below =
        l == 0 ? trace.input : trace.layers[static_cast<std::size_t>(l - 1)].out;
    grads.hidden[static_cast<std::size_t>(l)].weight = below.transpose() * dpre;
    grads.hidden[static_cast<std::size_t>(l)].bias = dpre.colwise().sum();
    da = dpre * params.hidden[static_cast<std::size_t>(l)].weight.transpose();
  }
  return grads;
}

}  // namespace pchoice
