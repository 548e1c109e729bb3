#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pchoice {

/// One query set: an m x d matrix of object feature vectors, one row per object.
struct ChoiceTask {
  Eigen::MatrixXd features;
  std::string task_id;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index feature_dim() const { return features.cols(); }
};

/// Binary vector marking the chosen objects of a task; entries are 0 or 1.
using ChoiceMask = std::vector<std::uint8_t>;

/// m x d' matrix of embedded utility points, one row per object.
using Embedding = Eigen::MatrixXd;

struct DatasetMeta {
  std::string problem;
  std::uint64_t seed = 0;
  int feature_dim = 0;
  // Label statistics over all generated tasks (no filtering is applied,
  // degenerate all-chosen tasks stay in and are counted here).
  std::int64_t total_objects = 0;
  std::int64_t total_chosen = 0;
};

struct Sample {
  ChoiceTask task;
  ChoiceMask choice;
};

/// Ordered list of (task, choice) observations.
struct Dataset {
  std::vector<Sample> samples;
  DatasetMeta meta;

  std::size_t size() const { return samples.size(); }
};

/// Throws std::invalid_argument if a mask length mismatches its task or an
/// entry is not 0/1, if any feature is non-finite, or if the dataset is empty.
void validate(const Dataset& data);

/// True iff a dominates b under maximization: a_k >= b_k for all k and
/// a_k > b_k for at least one k. Dimensions must match.
bool dominates(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b);

/// Mask of the points of Z not dominated by any other point of Z.
/// Exactly-equal rows never dominate each other, so duplicates both stay in.
/// Plain O(m^2 d') scan; task sizes are tens of points at most.
ChoiceMask pareto_front(const Embedding& Z);

struct NetworkParams;

/// Embeds the task in inference mode and returns the Pareto-optimal subset.
ChoiceMask predict_choice(const ChoiceTask& task, const NetworkParams& params);

}  // namespace pchoice
