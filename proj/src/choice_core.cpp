#include "pchoice/choice_core.hpp"

#include "pchoice/embed_net.hpp"

#include <stdexcept>

namespace pchoice {

void validate(const Dataset& data) {
  if (data.samples.empty()) {
    throw std::invalid_argument("dataset must contain at least one task");
  }
  for (const auto& sample : data.samples) {
    const auto m = sample.task.size();
    if (m < 1 || sample.task.feature_dim() < 1) {
      throw std::invalid_argument("task '" + sample.task.task_id + "' is empty");
    }
    if (!sample.task.features.allFinite()) {
      throw std::invalid_argument("task '" + sample.task.task_id + "' has non-finite features");
    }
    if (static_cast<Eigen::Index>(sample.choice.size()) != m) {
      throw std::invalid_argument("choice mask length mismatch in task '" + sample.task.task_id + "'");
    }
    for (auto bit : sample.choice) {
      if (bit != 0 && bit != 1) {
        throw std::invalid_argument("choice mask entries must be 0 or 1 in task '" + sample.task.task_id + "'");
      }
    }
  }
}

bool dominates(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dominates: dimension mismatch");
  }
  bool strict = false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
    if (a[k] > b[k]) strict = true;
  }
  return strict;
}

ChoiceMask pareto_front(const Embedding& Z) {
  const Eigen::Index m = Z.rows();
  if (m == 0) {
    throw std::invalid_argument("pareto_front: empty embedding");
  }
  if (!Z.allFinite()) {
    throw std::invalid_argument("pareto_front: non-finite embedding");
  }
  ChoiceMask mask(static_cast<std::size_t>(m), 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i && dominates(Z.row(j), Z.row(i))) {
        mask[static_cast<std::size_t>(i)] = 0;
        break;
      }
    }
  }
  return mask;
}

ChoiceMask predict_choice(const ChoiceTask& task, const NetworkParams& params) {
  return pareto_front(forward_inference(task.features, params));
}

}  // namespace pchoice
