#pragma once

#include "pchoice/choice_core.hpp"

#include <Eigen/Core>

namespace pchoice {

/// Convex-combination weights of the four loss terms.
struct LossWeights {
  double po = 0.0;
  double dom = 0.0;
  double mds = 0.0;
  double l2 = 0.0;

  /// Throws std::invalid_argument unless all weights are >= 0 and they sum
  /// to 1 within 1e-9.
  void validate() const;

  /// Rescales non-negative raw weights so they sum to 1.
  static LossWeights normalized(double po, double dom, double mds, double l2);
};

struct LossBreakdown {
  double po = 0.0;
  double dom = 0.0;
  double mds = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

/// Which points the dominance loss may use to dominate a non-chosen point.
enum class DomNeighborhood {
  AllOthers,   // every j != i, as the loss is defined
  ChosenOnly,  // restricted variant: only chosen j
};

/// Margin loss on chosen points: sum over ordered pairs i != j of
/// max(0, c_j * min_k (1 + z_ik - z_jk)). Penalizes any point that comes
/// within the unit margin of dominating a chosen point's image.
double loss_po(const Embedding& Z, const ChoiceMask& c);

/// Margin loss on non-chosen points: sum_i (1 - c_i) * min_{j != i}
/// sum_k max(0, 1 + z_ik - z_jk). Zero once every non-chosen point is
/// dominated with unit margin in every coordinate by some other point.
double loss_dom(const Embedding& Z, const ChoiceMask& c,
                DomNeighborhood neighborhood = DomNeighborhood::AllOthers);

/// Pairwise-normalized raw stress between object-space and embedding-space
/// Euclidean distances: (2 / (m(m-1))) * sum_{i<j} (|x_i-x_j| - |z_i-z_j|)^2.
double loss_mds(const ChoiceTask& Q, const Embedding& Z);

/// sum_i |z_i|_2 (non-squared norms); pins the shift-invariant losses to 0.
double loss_l2(const Embedding& Z);

LossBreakdown loss_total(const ChoiceTask& Q, const Embedding& Z, const ChoiceMask& c,
                         const LossWeights& w,
                         DomNeighborhood neighborhood = DomNeighborhood::AllOthers);

/// Analytic gradient of the weighted total w.r.t. Z. Min/max route their
/// gradient to the first achieving index on ties; hinge and norm kinks get
/// gradient 0.
Eigen::MatrixXd loss_grad(const ChoiceTask& Q, const Embedding& Z, const ChoiceMask& c,
                          const LossWeights& w,
                          DomNeighborhood neighborhood = DomNeighborhood::AllOthers);

}  // namespace pchoice
