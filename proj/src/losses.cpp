#include "pchoice/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pchoice {

namespace {

void check_lengths(const Embedding& Z, const ChoiceMask& c, const char* where) {
  if (Z.rows() < 1) {
    throw std::invalid_argument(std::string(where) + ": empty embedding");
  }
  if (static_cast<Eigen::Index>(c.size()) != Z.rows()) {
    throw std::invalid_argument(std::string(where) + ": mask length does not match embedding rows");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (po < 0.0 || dom < 0.0 || mds < 0.0 || l2 < 0.0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (std::abs(po + dom + mds + l2 - 1.0) > 1e-9) {
    throw std::invalid_argument("loss weights must sum to 1");
  }
}

LossWeights LossWeights::normalized(double po, double dom, double mds, double l2) {
  const double sum = po + dom + mds + l2;
  if (po < 0.0 || dom < 0.0 || mds < 0.0 || l2 < 0.0 || sum <= 0.0) {
    throw std::invalid_argument("raw loss weights must be non-negative with a positive sum");
  }
  return LossWeights{po / sum, dom / sum, mds / sum, l2 / sum};
}

double loss_po(const Embedding& Z, const ChoiceMask& c) {
  check_lengths(Z, c, "loss_po");
  const Eigen::Index m = Z.rows();
  const Eigen::Index dp = Z.cols();
  double total = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!c[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == j) continue;
      double margin = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < dp; ++k) {
        margin = std::min(margin, 1.0 + Z(i, k) - Z(j, k));
      }
      if (margin > 0.0) total += margin;
    }
  }
  return total;
}

double loss_dom(const Embedding& Z, const ChoiceMask& c, DomNeighborhood neighborhood) {
  check_lengths(Z, c, "loss_dom");
  const Eigen::Index m = Z.rows();
  const Eigen::Index dp = Z.cols();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (c[static_cast<std::size_t>(i)]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      if (neighborhood == DomNeighborhood::ChosenOnly && !c[static_cast<std::size_t>(j)]) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < dp; ++k) {
        s += std::max(0.0, 1.0 + Z(i, k) - Z(j, k));
      }
      best = std::min(best, s);
    }
    if (!std::isfinite(best)) {
      throw std::invalid_argument("loss_dom: no candidate dominator for a non-chosen point");
    }
    total += best;
  }
  return total;
}

double loss_mds(const ChoiceTask& Q, const Embedding& Z) {
  if (Q.size() != Z.rows()) {
    throw std::invalid_argument("loss_mds: task and embedding sizes differ");
  }
  const Eigen::Index m = Z.rows();
  if (m < 1) {
    throw std::invalid_argument("loss_mds: empty task");
  }
  if (m == 1) return 0.0;
  double stress = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double dx = (Q.features.row(i) - Q.features.row(j)).norm();
      const double dz = (Z.row(i) - Z.row(j)).norm();
      stress += (dx - dz) * (dx - dz);
    }
  }
  return stress * 2.0 / (static_cast<double>(m) * static_cast<double>(m - 1));
}

double loss_l2(const Embedding& Z) {
  if (Z.rows() < 1) {
    throw std::invalid_argument("loss_l2: empty embedding");
  }
  return Z.rowwise().norm().sum();
}

LossBreakdown loss_total(const ChoiceTask& Q, const Embedding& Z, const ChoiceMask& c,
                         const LossWeights& w, DomNeighborhood neighborhood) {
  w.validate();
  LossBreakdown b;
  b.po = loss_po(Z, c);
  b.dom = loss_dom(Z, c, neighborhood);
  b.mds = loss_mds(Q, Z);
  b.l2 = loss_l2(Z);
  b.total = w.po * b.po + w.dom * b.dom + w.mds * b.mds + w.l2 * b.l2;
  return b;
}

Eigen::MatrixXd loss_grad(const ChoiceTask& Q, const Embedding& Z, const ChoiceMask& c,
                          const LossWeights& w, DomNeighborhood neighborhood) {
  w.validate();
  check_lengths(Z, c, "loss_grad");
  if (Q.size() != Z.rows()) {
    throw std::invalid_argument("loss_grad: task and embedding sizes differ");
  }
  const Eigen::Index m = Z.rows();
  const Eigen::Index dp = Z.cols();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, dp);

  // L_PO: active pairs contribute through the first coordinate achieving the min.
  if (w.po != 0.0) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!c[static_cast<std::size_t>(j)]) continue;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (i == j) continue;
        double margin = std::numeric_limits<double>::infinity();
        Eigen::Index arg_k = 0;
        for (Eigen::Index k = 0; k < dp; ++k) {
          const double v = 1.0 + Z(i, k) - Z(j, k);
          if (v < margin) {
            margin = v;
            arg_k = k;
          }
        }
        if (margin > 0.0) {
          grad(i, arg_k) += w.po;
          grad(j, arg_k) -= w.po;
        }
      }
    }
  }

  // L_DOM: only the first minimizing j contributes, through its active hinges.
  if (w.dom != 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (c[static_cast<std::size_t>(i)]) continue;
      double best = std::numeric_limits<double>::infinity();
      Eigen::Index arg_j = -1;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == i) continue;
        if (neighborhood == DomNeighborhood::ChosenOnly && !c[static_cast<std::size_t>(j)]) continue;
        double s = 0.0;
        for (Eigen::Index k = 0; k < dp; ++k) {
          s += std::max(0.0, 1.0 + Z(i, k) - Z(j, k));
        }
        if (s < best) {
          best = s;
          arg_j = j;
        }
      }
      if (arg_j < 0) {
        throw std::invalid_argument("loss_grad: no candidate dominator for a non-chosen point");
      }
      for (Eigen::Index k = 0; k < dp; ++k) {
        if (1.0 + Z(i, k) - Z(arg_j, k) > 0.0) {
          grad(i, k) += w.dom;
          grad(arg_j, k) -= w.dom;
        }
      }
    }
  }

  // MDS stress; the distance gradient at coincident embedded points is 0.
  if (w.mds != 0.0 && m > 1) {
    const double scale = w.mds * 2.0 / (static_cast<double>(m) * static_cast<double>(m - 1));
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double dx = (Q.features.row(i) - Q.features.row(j)).norm();
        const Eigen::RowVectorXd diff = Z.row(i) - Z.row(j);
        const double dz = diff.norm();
        if (dz > 0.0) {
          const Eigen::RowVectorXd g = scale * 2.0 * (dz - dx) * (diff / dz);
          grad.row(i) += g;
          grad.row(j) -= g;
        }
      }
    }
  }

  // L2: gradient of |z_i| is z_i / |z_i|, defined 0 at the origin.
  if (w.l2 != 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double norm = Z.row(i).norm();
      if (norm > 0.0) {
        grad.row(i) += w.l2 * Z.row(i) / norm;
      }
    }
  }

  return grad;
}

}  // namespace pchoice
