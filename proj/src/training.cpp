#include "pchoice/training.hpp"

#include "pchoice/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace pchoice {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(max_lr > 0.0)) throw std::invalid_argument("TrainConfig: max_lr must be > 0");
  if (!(base_lr_fraction > 0.0 && base_lr_fraction <= 1.0)) {
    throw std::invalid_argument("TrainConfig: base_lr_fraction must be in (0,1]");
  }
  weights.validate();
}

double cyclical_lr(std::int64_t step, const TrainConfig& cfg) {
  const double base = cfg.max_lr * cfg.base_lr_fraction;
  const std::int64_t cycle = std::max<std::int64_t>(2, cfg.cycle_length_steps);
  const double pos = static_cast<double>(step % cycle);
  const double half = static_cast<double>(cycle) / 2.0;
  const double tri = 1.0 - std::abs(pos / half - 1.0);
  return base + (cfg.max_lr - base) * tri;
}

namespace {

struct AdamState {
  ParamGrads m;
  ParamGrads v;
  std::int64_t t = 0;
};

void apply_update(NetworkParams& params, ParamGrads& grads, AdamState& state,
                  const TrainConfig& cfg, double lr) {
  if (cfg.optimizer == OptimizerKind::Sgd) {
    state.t += 1;
    for_each_tensor(params, grads, state.m, state.v,
                    [&](auto p, auto g, auto, auto) { p -= lr * g; });
    return;
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for_each_tensor(params, grads, state.m, state.v, [&](auto p, auto g, auto m, auto v) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    p -= lr * (m / bc1).cwiseQuotient(((v / bc2).cwiseSqrt().array() + cfg.adam_epsilon).matrix());
  });
}

void accumulate(LossBreakdown& into, const LossBreakdown& term) {
  into.po += term.po;
  into.dom += term.dom;
  into.mds += term.mds;
  into.l2 += term.l2;
  into.total += term.total;
}

LossBreakdown scaled(const LossBreakdown& b, double s) {
  return LossBreakdown{b.po * s, b.dom * s, b.mds * s, b.l2 * s, b.total * s};
}

}  // namespace

TrainReport train(const Dataset& data, const Dataset* val, const ArchSpec& arch,
                  const TrainConfig& cfg) {
  cfg.validate();
  validate(data);
  if (val) validate(*val);
  for (const auto& sample : data.samples) {
    if (sample.task.feature_dim() != arch.input_dim) {
      throw std::invalid_argument("train: task feature dimension does not match architecture");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(data.samples.size());
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;

  TrainConfig resolved = cfg;
  if (resolved.cycle_length_steps <= 0) {
    resolved.cycle_length_steps = 2 * steps_per_epoch;
  }

  TrainReport report;
  report.seed = cfg.seed;
  report.final_params = init_params(arch, cfg.seed);
  NetworkParams& params = report.final_params;

  AdamState opt;
  opt.m = zero_like(params);
  opt.v = zero_like(params);

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::int64_t global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown epoch_sum;

    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - begin);

      Eigen::Index rows = 0;
      for (int b = 0; b < count; ++b) {
        rows += data.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + b)])]
                    .task.size();
      }
      Eigen::MatrixXd batch(rows, arch.input_dim);
      std::vector<Eigen::Index> offsets(static_cast<std::size_t>(count) + 1, 0);
      Eigen::Index at = 0;
      for (int b = 0; b < count; ++b) {
        const auto& task =
            data.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + b)])].task;
        batch.middleRows(at, task.size()) = task.features;
        at += task.size();
        offsets[static_cast<std::size_t>(b) + 1] = at;
      }

      ForwardTrace trace;
      const Embedding z = forward(batch, params, ForwardMode::Train, &trace);

      const double inv_count = 1.0 / static_cast<double>(count);
      Eigen::MatrixXd grad_z = Eigen::MatrixXd::Zero(rows, arch.output_dim);
      LossBreakdown batch_sum;
      for (int b = 0; b < count; ++b) {
        const auto& sample =
            data.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + b)])];
        const Eigen::Index task_rows = offsets[static_cast<std::size_t>(b) + 1] -
                                       offsets[static_cast<std::size_t>(b)];
        const Embedding task_z = z.middleRows(offsets[static_cast<std::size_t>(b)], task_rows);
        accumulate(batch_sum, loss_total(sample.task, task_z, sample.choice, cfg.weights,
                                         cfg.dom_neighborhood));
        grad_z.middleRows(offsets[static_cast<std::size_t>(b)], task_rows) =
            inv_count * loss_grad(sample.task, task_z, sample.choice, cfg.weights,
                                  cfg.dom_neighborhood);
      }
      if (!std::isfinite(batch_sum.total)) {
        throw TrainingDiverged(epoch + 1, global_step, "mini-batch loss is not finite");
      }
      accumulate(epoch_sum, batch_sum);

      ParamGrads grads = backward(trace, params, grad_z);
      apply_update(params, grads, opt, resolved, cyclical_lr(global_step, resolved));
      ++global_step;
    }

    EpochRecord record;
    record.epoch = epoch + 1;
    record.mean_loss = scaled(epoch_sum, 1.0 / static_cast<double>(n));
    if (val) {
      record.val_a_mean = evaluate(*val, params).mean;
    }
    report.epochs.push_back(std::move(record));
  }

  report.total_steps = global_step;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace pchoice
