// Independent reference implementations used as test oracles. These are
// deliberately written as literal transcriptions with plain loops, separate
// from the library's code paths.
#pragma once

#include "pchoice/choice_core.hpp"
#include "pchoice/embed_net.hpp"
#include "pchoice/losses.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Dominance under maximization, restated via counting comparisons.
inline bool dominates_max(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  int at_least = 0;
  int strictly = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] >= b[k]) ++at_least;
    if (a[k] > b[k]) ++strictly;
  }
  return at_least == a.size() && strictly >= 1;
}

inline pchoice::ChoiceMask front_max(const Eigen::MatrixXd& Z) {
  pchoice::ChoiceMask mask(static_cast<std::size_t>(Z.rows()), 0);
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < Z.rows() && !dominated; ++j) {
      dominated = j != i && dominates_max(Z.row(j), Z.row(i));
    }
    mask[static_cast<std::size_t>(i)] = dominated ? 0 : 1;
  }
  return mask;
}

// Minimization-orientation front used to check benchmark labels.
inline pchoice::ChoiceMask front_min(const Eigen::MatrixXd& objectives) {
  pchoice::ChoiceMask mask(static_cast<std::size_t>(objectives.rows()), 0);
  for (Eigen::Index i = 0; i < objectives.rows(); ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < objectives.rows() && !dominated; ++j) {
      if (j == i) continue;
      int leq = 0;
      int lt = 0;
      for (Eigen::Index k = 0; k < objectives.cols(); ++k) {
        if (objectives(j, k) <= objectives(i, k)) ++leq;
        if (objectives(j, k) < objectives(i, k)) ++lt;
      }
      dominated = leq == objectives.cols() && lt >= 1;
    }
    mask[static_cast<std::size_t>(i)] = dominated ? 0 : 1;
  }
  return mask;
}

// Scalar transcriptions of the loss terms.
inline double loss_po(const Eigen::MatrixXd& Z, const pchoice::ChoiceMask& c) {
  double total = 0.0;
  const Eigen::Index m = Z.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      double inner = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < Z.cols(); ++k) {
        inner = std::min(inner, 1.0 + Z(i, k) - Z(j, k));
      }
      total += std::max(0.0, static_cast<double>(c[static_cast<std::size_t>(j)]) * inner);
    }
  }
  return total;
}

inline double loss_dom(const Eigen::MatrixXd& Z, const pchoice::ChoiceMask& c) {
  double total = 0.0;
  const Eigen::Index m = Z.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (c[static_cast<std::size_t>(i)] == 1) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      double sum = 0.0;
      for (Eigen::Index k = 0; k < Z.cols(); ++k) {
        sum += std::max(0.0, 1.0 + Z(i, k) - Z(j, k));
      }
      best = std::min(best, sum);
    }
    total += best;
  }
  return total;
}

inline double loss_mds(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z) {
  const Eigen::Index m = Z.rows();
  if (m < 2) return 0.0;
  double stress = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      double dx2 = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        dx2 += (X(i, k) - X(j, k)) * (X(i, k) - X(j, k));
      }
      double dz2 = 0.0;
      for (Eigen::Index k = 0; k < Z.cols(); ++k) {
        dz2 += (Z(i, k) - Z(j, k)) * (Z(i, k) - Z(j, k));
      }
      const double r = std::sqrt(dx2) - std::sqrt(dz2);
      stress += r * r;
    }
  }
  return 2.0 * stress / (static_cast<double>(m) * static_cast<double>(m - 1));
}

inline double loss_l2(const Eigen::MatrixXd& Z) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < Z.cols(); ++k) sq += Z(i, k) * Z(i, k);
    total += std::sqrt(sq);
  }
  return total;
}

// --- random inputs ------------------------------------------------------

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double scale = 2.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

inline pchoice::ChoiceMask random_mask(std::size_t m, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(0.5);
  pchoice::ChoiceMask mask(m);
  for (auto& b : mask) b = bit(rng) ? 1 : 0;
  return mask;
}

// --- finite differences and kink guards ----------------------------------

// Relative mismatch with a unit floor, so exact zeros compare cleanly.
inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

template <typename F>
double central_difference(F&& f, double& slot, double h = 1e-5) {
  const double saved = slot;
  slot = saved + h;
  const double up = f();
  slot = saved - h;
  const double down = f();
  slot = saved;
  return (up - down) / (2.0 * h);
}

// Distance of the loss configuration to its nearest non-smooth point: hinge
// arguments near 0, near-ties inside min reductions, vanishing norms or
// pairwise distances. Configurations below a small threshold are resampled
// by the gradient-check tests.
inline double loss_kink_margin(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                               const pchoice::ChoiceMask& c) {
  const Eigen::Index m = Z.rows();
  const Eigen::Index dp = Z.cols();
  double margin = std::numeric_limits<double>::infinity();

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<double> candidates;
      for (Eigen::Index k = 0; k < dp; ++k) {
        const double v = 1.0 + Z(i, k) - Z(j, k);
        margin = std::min(margin, std::abs(v));
        candidates.push_back(v);
      }
      std::sort(candidates.begin(), candidates.end());
      if (candidates.size() >= 2) {
        margin = std::min(margin, candidates[1] - candidates[0]);
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (c[static_cast<std::size_t>(i)] == 1) continue;
    std::vector<double> sums;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < dp; ++k) s += std::max(0.0, 1.0 + Z(i, k) - Z(j, k));
      sums.push_back(s);
    }
    std::sort(sums.begin(), sums.end());
    if (sums.size() >= 2) margin = std::min(margin, sums[1] - sums[0]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    margin = std::min(margin, Z.row(i).norm());
    for (Eigen::Index j = i + 1; j < m; ++j) {
      margin = std::min(margin, (Z.row(i) - Z.row(j)).norm());
    }
  }
  (void)X;
  return margin;
}

// Parameter-space gradient checks additionally need the ReLU inputs to be
// away from 0.
inline double trace_kink_margin(const pchoice::ForwardTrace& trace) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& layer : trace.layers) {
    if (trace.arch.bn_placement == pchoice::BatchNormPlacement::AfterActivation) {
      margin = std::min(margin, layer.pre.array().abs().minCoeff());
    } else {
      margin = std::min(margin, layer.bn_out.array().abs().minCoeff());
    }
  }
  return margin;
}

// Trainable tensors of a parameter set, in a fixed order (running statistics
// are excluded, matching what the optimizer touches).
struct Block {
  double* data;
  Eigen::Index size;
};

inline std::vector<Block> param_blocks(pchoice::NetworkParams& p) {
  std::vector<Block> blocks;
  for (std::size_t l = 0; l < p.hidden.size(); ++l) {
    blocks.push_back({p.hidden[l].weight.data(), p.hidden[l].weight.size()});
    blocks.push_back({p.hidden[l].bias.data(), p.hidden[l].bias.size()});
    blocks.push_back({p.norms[l].gamma.data(), p.norms[l].gamma.size()});
    blocks.push_back({p.norms[l].beta.data(), p.norms[l].beta.size()});
  }
  blocks.push_back({p.head.weight.data(), p.head.weight.size()});
  blocks.push_back({p.head.bias.data(), p.head.bias.size()});
  return blocks;
}

inline std::vector<Block> grad_blocks(pchoice::ParamGrads& g) {
  std::vector<Block> blocks;
  for (std::size_t l = 0; l < g.hidden.size(); ++l) {
    blocks.push_back({g.hidden[l].weight.data(), g.hidden[l].weight.size()});
    blocks.push_back({g.hidden[l].bias.data(), g.hidden[l].bias.size()});
    blocks.push_back({g.norms[l].gamma.data(), g.norms[l].gamma.size()});
    blocks.push_back({g.norms[l].beta.data(), g.norms[l].beta.size()});
  }
  blocks.push_back({g.head.weight.data(), g.head.weight.size()});
  blocks.push_back({g.head.bias.data(), g.head.bias.size()});
  return blocks;
}

}  // namespace oracle
