#pragma once

#include "pchoice/choice_core.hpp"
#include "pchoice/embed_net.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pchoice {

struct ConfusionTotals {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

struct EvalReport {
  std::vector<double> per_task;  // A-mean per task
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single task
  ConfusionTotals confusion;
  std::string problem;
  std::string split;
  int repetition = -1;
  std::uint64_t seed = 0;
};

/// Arithmetic mean of the true positive and true negative rate. A rate whose
/// class is empty in the truth counts as 1.0 (no errors were possible).
double a_mean(const ChoiceMask& c_true, const ChoiceMask& c_pred);

/// Sample standard deviation (n-1 denominator); 0 when fewer than 2 values.
double sample_stddev(const std::vector<double>& values, double mean);

/// Predicts every task in inference mode and macro-averages A-mean over
/// tasks; pooled confusion totals are kept alongside.
EvalReport evaluate(const Dataset& data, const NetworkParams& params);

/// Monte-Carlo estimate of the A-mean of i.i.d. Bernoulli(p) predictions
/// over `trials` task-trials (tasks are cycled in order). When `per_trial`
/// is given it receives the individual task-trial A-means.
double random_baseline(const Dataset& data, double p, int trials, std::uint64_t seed,
                       std::vector<double>* per_trial = nullptr);

struct SplitSizes {
  int test = 0;
  int val = 0;
  int train = 0;
};

/// test = round(test_frac * N); of the remainder, val = round(val_frac * rest).
/// Throws std::invalid_argument if any part ends up empty.
SplitSizes cv_split_sizes(int n, double test_frac, double val_frac);

struct CvSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// Seeded shuffle split for repetition `rep`; disjoint, exhaustive.
CvSplit cv_split(int n, double test_frac, double val_frac, std::uint64_t seed, int rep);

/// Trains a model given (train, val, seed) and returns its parameters; the
/// standard fit tunes hyperparameters on val and then trains on train alone.
using FitFunction =
    std::function<NetworkParams(const Dataset& train, const Dataset& val, std::uint64_t seed)>;

struct CvResult {
  std::vector<EvalReport> reports;  // one per repetition
  double mean = 0.0;
  double stddev = 0.0;
};

/// Repeated Monte Carlo cross-validation: per repetition a fresh shuffle
/// split, fit on train/val, evaluation on the held-out test tasks.
CvResult monte_carlo_cv(const Dataset& data, int reps, double test_frac, double val_frac,
                        const FitFunction& fit, std::uint64_t seed);

struct AblationResult {
  CvResult full;
  CvResult no_mds;
  double mean_difference = 0.0;  // no_mds mean - full mean
};

/// Paired ablation: both arms share the same split seeds; the second fit is
/// expected to pin the MDS weight to zero.
AblationResult ablate_mds(const Dataset& data, int reps, double test_frac, double val_frac,
                          const FitFunction& fit_full, const FitFunction& fit_no_mds,
                          std::uint64_t seed);

}  // namespace pchoice
