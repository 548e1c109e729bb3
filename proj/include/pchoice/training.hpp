#pragma once

#include "pchoice/choice_core.hpp"
#include "pchoice/embed_net.hpp"
#include "pchoice/losses.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pchoice {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  int epochs = 500;
  int batch_size = 64;  // tasks per step
  double max_lr = 1e-2;
  double base_lr_fraction = 0.1;
  // Triangular cycle length in steps; 0 means two epochs' worth, resolved
  // once the dataset size is known.
  int cycle_length_steps = 0;
  LossWeights weights = LossWeights::normalized(0.4, 0.4, 0.15, 0.05);
  DomNeighborhood dom_neighborhood = DomNeighborhood::AllOthers;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown mean_loss;               // averaged over tasks
  std::optional<double> val_a_mean;      // present when a validation set was given
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  NetworkParams final_params;
  std::int64_t total_steps = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Raised when a training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::int64_t step, const std::string& what)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + ": " + what),
        epoch_(epoch),
        step_(step) {}
  int epoch() const { return epoch_; }
  std::int64_t step() const { return step_; }

 private:
  int epoch_;
  std::int64_t step_;
};

/// Triangular wave between base_lr = max_lr * base_lr_fraction and max_lr:
/// starts at base_lr, peaks at half a cycle, returns to base_lr.
double cyclical_lr(std::int64_t step, const TrainConfig& cfg);

/// Deterministic mini-batch training of the embedding network under the
/// composite loss. Batch statistics pool the object rows of all tasks in the
/// mini-batch. Returns per-epoch loss means, per-epoch validation A-mean when
/// `val` is present, and the final-epoch parameters.
TrainReport train(const Dataset& data, const Dataset* val, const ArchSpec& arch,
                  const TrainConfig& cfg);

}  // namespace pchoice
