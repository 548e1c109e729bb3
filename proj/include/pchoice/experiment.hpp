#pragma once

#include "pchoice/benchmarks.hpp"
#include "pchoice/evaluation.hpp"
#include "pchoice/training.hpp"
#include "pchoice/tuning.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pchoice {

/// End-to-end study configuration: generate each problem's dataset, tune and
/// cross-validate, optionally with the paired no-MDS ablation arm.
struct ExperimentConfig {
  std::vector<std::string> problems;
  int n_tasks = 2048;
  int m = 10;
  std::uint64_t seed = 0;
  int reps = 3;
  double test_frac = 0.1;
  double val_frac = 1.0 / 9.0;
  int tuning_budget = 15;
  TunerMode tuner_mode = TunerMode::GaussianProcess;
  int output_dim = 2;
  TrainConfig train_base;  // weights/max_lr are overridden by tuned configs
  SearchSpace space;
  bool ablate_mds = false;
  int threads = 1;
};

struct ProblemSummary {
  std::string problem;
  std::string arm;  // "full" or "no_mds"
  CvResult result;
};

/// Fit hook used by cross validation: tunes on (train, val), then retrains on
/// train alone with the best configuration. Trials that diverge score 0.
FitFunction make_tuned_fit(const TrainConfig& base, const SearchSpace& space, int budget,
                           TunerMode mode, int output_dim);

/// Worker-thread cap taken from PARETO_CHOICE_THREADS, defaulting to the
/// hardware concurrency; always at least 1.
int env_thread_cap();

/// Runs the configured problems (two arms each when ablating). `on_done`, if
/// set, is called after each problem completes, with results filled so far in
/// problem order; summaries are returned in deterministic order regardless of
/// thread count.
std::vector<ProblemSummary> run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(const std::vector<ProblemSummary>&)>& on_done = {});

}  // namespace pchoice
