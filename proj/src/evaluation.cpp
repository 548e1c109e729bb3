#include "pchoice/evaluation.hpp"

#include "pchoice/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pchoice {

double a_mean(const ChoiceMask& c_true, const ChoiceMask& c_pred) {
  if (c_true.size() != c_pred.size()) {
    throw std::invalid_argument("a_mean: mask lengths differ");
  }
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < c_true.size(); ++i) {
    if (c_true[i]) {
      (c_pred[i] ? tp : fn) += 1;
    } else {
      (c_pred[i] ? fp : tn) += 1;
    }
  }
  const double tpr = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double tnr = tn + fp == 0 ? 1.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
  return 0.5 * (tpr + tnr);
}

double sample_stddev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

EvalReport evaluate(const Dataset& data, const NetworkParams& params) {
  validate(data);
  EvalReport report;
  report.problem = data.meta.problem;
  report.per_task.reserve(data.samples.size());
  for (const auto& sample : data.samples) {
    const ChoiceMask pred = predict_choice(sample.task, params);
    report.per_task.push_back(a_mean(sample.choice, pred));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (sample.choice[i]) {
        (pred[i] ? report.confusion.tp : report.confusion.fn) += 1;
      } else {
        (pred[i] ? report.confusion.fp : report.confusion.tn) += 1;
      }
    }
  }
  report.mean = std::accumulate(report.per_task.begin(), report.per_task.end(), 0.0) /
                static_cast<double>(report.per_task.size());
  report.stddev = sample_stddev(report.per_task, report.mean);
  return report;
}

double random_baseline(const Dataset& data, double p, int trials, std::uint64_t seed,
                       std::vector<double>* per_trial) {
  validate(data);
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("random_baseline: p must be in (0,1)");
  }
  if (trials < 1) {
    throw std::invalid_argument("random_baseline: trials must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution include(p);
  if (per_trial) {
    per_trial->clear();
    per_trial->reserve(static_cast<std::size_t>(trials));
  }
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto& sample = data.samples[static_cast<std::size_t>(t) % data.samples.size()];
    ChoiceMask pred(sample.choice.size());
    for (auto& bit : pred) bit = include(rng) ? 1 : 0;
    const double score = a_mean(sample.choice, pred);
    if (per_trial) per_trial->push_back(score);
    sum += score;
  }
  return sum / static_cast<double>(trials);
}

SplitSizes cv_split_sizes(int n, double test_frac, double val_frac) {
  if (!(test_frac > 0.0 && test_frac < 1.0) || !(val_frac > 0.0 && val_frac < 1.0)) {
    throw std::invalid_argument("cv_split_sizes: fractions must lie in (0,1)");
  }
  SplitSizes s;
  s.test = static_cast<int>(std::llround(test_frac * n));
  const int rest = n - s.test;
  s.val = static_cast<int>(std::llround(val_frac * rest));
  s.train = rest - s.val;
  if (s.test < 1 || s.val < 1 || s.train < 1) {
    throw std::invalid_argument("cv_split_sizes: split too small to be non-empty");
  }
  return s;
}

CvSplit cv_split(int n, double test_frac, double val_frac, std::uint64_t seed, int rep) {
  const SplitSizes sizes = cv_split_sizes(n, test_frac, val_frac);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(split_seed(seed, 0xC5000000ULL + static_cast<std::uint64_t>(rep)));
  std::shuffle(order.begin(), order.end(), rng);
  CvSplit split;
  split.test.assign(order.begin(), order.begin() + sizes.test);
  split.val.assign(order.begin() + sizes.test, order.begin() + sizes.test + sizes.val);
  split.train.assign(order.begin() + sizes.test + sizes.val, order.end());
  return split;
}

namespace {

Dataset subset(const Dataset& data, const std::vector<int>& indices) {
  Dataset out;
  out.meta = data.meta;
  out.meta.total_objects = 0;
  out.meta.total_chosen = 0;
  out.samples.reserve(indices.size());
  for (int idx : indices) {
    const auto& sample = data.samples[static_cast<std::size_t>(idx)];
    out.meta.total_objects += sample.task.size();
    for (auto bit : sample.choice) out.meta.total_chosen += bit;
    out.samples.push_back(sample);
  }
  return out;
}

void summarize(CvResult& result) {
  std::vector<double> means;
  means.reserve(result.reports.size());
  for (const auto& r : result.reports) means.push_back(r.mean);
  result.mean = std::accumulate(means.begin(), means.end(), 0.0) /
                static_cast<double>(means.size());
  result.stddev = sample_stddev(means, result.mean);
}

}  // namespace

CvResult monte_carlo_cv(const Dataset& data, int reps, double test_frac, double val_frac,
                        const FitFunction& fit, std::uint64_t seed) {
  validate(data);
  if (reps < 1) {
    throw std::invalid_argument("monte_carlo_cv: reps must be >= 1");
  }
  CvResult result;
  for (int rep = 0; rep < reps; ++rep) {
    const CvSplit split =
        cv_split(static_cast<int>(data.samples.size()), test_frac, val_frac, seed, rep);
    const Dataset train_set = subset(data, split.train);
    const Dataset val_set = subset(data, split.val);
    const Dataset test_set = subset(data, split.test);
    const std::uint64_t rep_seed = split_seed(seed, 0xF1000000ULL + static_cast<std::uint64_t>(rep));
    const NetworkParams params = fit(train_set, val_set, rep_seed);
    EvalReport report = evaluate(test_set, params);
    report.split = "test";
    report.repetition = rep;
    report.seed = rep_seed;
    result.reports.push_back(std::move(report));
  }
  summarize(result);
  return result;
}

AblationResult ablate_mds(const Dataset& data, int reps, double test_frac, double val_frac,
                          const FitFunction& fit_full, const FitFunction& fit_no_mds,
                          std::uint64_t seed) {
  AblationResult result;
  result.full = monte_carlo_cv(data, reps, test_frac, val_frac, fit_full, seed);
  result.no_mds = monte_carlo_cv(data, reps, test_frac, val_frac, fit_no_mds, seed);
  result.mean_difference = result.no_mds.mean - result.full.mean;
  return result;
}

}  // namespace pchoice
