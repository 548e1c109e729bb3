#pragma once

#include "pchoice/losses.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace pchoice {

/// Hyperparameters the tuner searches over.
struct TunedConfig {
  LossWeights weights;
  double max_lr = 1e-2;
  int hidden_layers = 1;
  int hidden_units = 32;
};

/// Simplex over the loss weights (coordinates may be pinned), a log-uniform
/// learning-rate range and inclusive integer ranges for the architecture.
struct SearchSpace {
  std::array<std::optional<double>, 4> alpha_pins;  // po, dom, mds, l2
  double lr_min = 1e-3;
  double lr_max = 1e-1;
  int layers_min = 1;
  int layers_max = 2;
  int units_min = 8;
  int units_max = 64;

  void validate() const;
};

struct Trial {
  TunedConfig config;
  double value = 0.0;  // validation A-mean
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;  // the tuning seed the trial ran under
};

struct TuneResult {
  TunedConfig best;
  double best_value = 0.0;
  std::size_t best_index = 0;
  std::vector<Trial> trials;
};

enum class TunerMode { GaussianProcess, RandomSearch };

using TuneObjective = std::function<double(const TunedConfig&)>;

/// Uniform draw: weights uniform on the (pinned) simplex via normalized
/// exponentials, max_lr log-uniform, integers uniform inclusive.
TunedConfig sample_config(const SearchSpace& space, std::mt19937_64& rng);

/// Budgeted maximization of the objective. Runs a space-filling initial batch
/// of min(10, budget) configurations, then Gaussian-process surrogate
/// proposals chosen by expected improvement over random candidate starts.
/// Exactly `budget` objective evaluations; returns the best observed
/// configuration (earliest on ties) and the full trial log.
TuneResult tune(const SearchSpace& space, int budget, const TuneObjective& objective,
                std::uint64_t seed, TunerMode mode = TunerMode::GaussianProcess);

}  // namespace pchoice
