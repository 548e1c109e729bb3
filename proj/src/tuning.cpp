#include "pchoice/tuning.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pchoice {

void SearchSpace::validate() const {
  double pinned_sum = 0.0;
  int pinned = 0;
  for (const auto& pin : alpha_pins) {
    if (pin) {
      if (*pin < 0.0 || *pin > 1.0) {
        throw std::invalid_argument("SearchSpace: pinned weight outside [0,1]");
      }
      pinned_sum += *pin;
      ++pinned;
    }
  }
  if (pinned_sum > 1.0 + 1e-9) {
    throw std::invalid_argument("SearchSpace: pinned weights exceed 1");
  }
  if (pinned == 4 && std::abs(pinned_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("SearchSpace: fully pinned weights must sum to 1");
  }
  if (!(lr_min > 0.0) || lr_min > lr_max) {
    throw std::invalid_argument("SearchSpace: need 0 < lr_min <= lr_max");
  }
  if (layers_min < 0 || layers_min > layers_max) {
    throw std::invalid_argument("SearchSpace: bad hidden-layer range");
  }
  if (units_min < 1 || units_min > units_max) {
    throw std::invalid_argument("SearchSpace: bad hidden-unit range");
  }
}

namespace {

std::vector<int> free_alpha_indices(const SearchSpace& space) {
  std::vector<int> free;
  for (int i = 0; i < 4; ++i) {
    if (!space.alpha_pins[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  return free;
}

double pinned_alpha_sum(const SearchSpace& space) {
  double sum = 0.0;
  for (const auto& pin : space.alpha_pins) {
    if (pin) sum += *pin;
  }
  return sum;
}

std::array<double, 4> config_alphas(const TunedConfig& c) {
  return {c.weights.po, c.weights.dom, c.weights.mds, c.weights.l2};
}

TunedConfig with_alphas(TunedConfig c, const std::array<double, 4>& a) {
  c.weights = LossWeights{a[0], a[1], a[2], a[3]};
  return c;
}

/// Normalized encoding of a configuration for the surrogate: the free weights
/// go through an orthonormal chart of the simplex's affine hull, the learning
/// rate through normalized log coordinates, integers scaled to [0,1].
/// Degenerate (fully pinned) dimensions are dropped.
struct Encoder {
  const SearchSpace& space;
  std::vector<int> free;
  double free_sum;
  Eigen::MatrixXd basis;  // (f-1) x f orthonormal rows spanning the sum-zero subspace

  explicit Encoder(const SearchSpace& s) : space(s), free(free_alpha_indices(s)) {
    free_sum = std::max(1.0 - pinned_alpha_sum(s), 0.0);
    const int f = static_cast<int>(free.size());
    if (f >= 2) {
      basis.setZero(f - 1, f);
      for (int r = 0; r < f - 1; ++r) {
        // Helmert row: (1,...,1,-(r+1),0,...) / sqrt((r+1)(r+2))
        for (int c = 0; c <= r; ++c) basis(r, c) = 1.0;
        basis(r, r + 1) = -static_cast<double>(r + 1);
        basis.row(r) /= std::sqrt(static_cast<double>((r + 1) * (r + 2)));
      }
    }
  }

  int dim() const {
    int d = free.size() >= 2 ? static_cast<int>(free.size()) - 1 : 0;
    if (space.lr_max > space.lr_min) ++d;
    if (space.layers_max > space.layers_min) ++d;
    if (space.units_max > space.units_min) ++d;
    return d;
  }

  Eigen::VectorXd encode(const TunedConfig& c) const {
    Eigen::VectorXd x(dim());
    int at = 0;
    if (free.size() >= 2) {
      Eigen::VectorXd alpha(static_cast<Eigen::Index>(free.size()));
      const auto a = config_alphas(c);
      for (std::size_t i = 0; i < free.size(); ++i) {
        alpha[static_cast<Eigen::Index>(i)] = a[static_cast<std::size_t>(free[i])];
      }
      const double scale = free_sum > 0.0 ? free_sum : 1.0;
      Eigen::VectorXd t = basis * (alpha / scale);
      x.segment(at, t.size()) = t;
      at += static_cast<int>(t.size());
    }
    if (space.lr_max > space.lr_min) {
      x[at++] = (std::log(c.max_lr) - std::log(space.lr_min)) /
                (std::log(space.lr_max) - std::log(space.lr_min));
    }
    if (space.layers_max > space.layers_min) {
      x[at++] = static_cast<double>(c.hidden_layers - space.layers_min) /
                static_cast<double>(space.layers_max - space.layers_min);
    }
    if (space.units_max > space.units_min) {
      x[at++] = static_cast<double>(c.hidden_units - space.units_min) /
                static_cast<double>(space.units_max - space.units_min);
    }
    return x;
  }
};

/// Zero-mean GP with a squared-exponential kernel on encoded configurations.
/// The length scale is picked from a small grid by marginal likelihood.
struct GpSurrogate {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // standardized
  double y_mean = 0.0;
  double y_scale = 1.0;
  double length_scale = 0.5;
  double noise = 1e-4;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;

  static Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ell) {
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        k(i, j) = std::exp(-0.5 * (a.row(i) - b.row(j)).squaredNorm() / (ell * ell));
      }
    }
    return k;
  }

  void fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& values) {
    X = points;
    y_mean = values.mean();
    const double var = (values.array() - y_mean).square().sum() /
                       std::max<double>(1.0, static_cast<double>(values.size()) - 1.0);
    y_scale = var > 1e-24 ? std::sqrt(var) : 1.0;
    y = (values.array() - y_mean) / y_scale;

    double best_lml = -std::numeric_limits<double>::infinity();
    for (double ell : {0.1, 0.2, 0.5, 1.0, 2.0}) {
      Eigen::MatrixXd k = kernel(X, X, ell);
      k.diagonal().array() += noise;
      Eigen::LLT<Eigen::MatrixXd> chol(k);
      if (chol.info() != Eigen::Success) continue;
      Eigen::VectorXd a = chol.solve(y);
      const double lml = -0.5 * y.dot(a) -
                         chol.matrixLLT().diagonal().array().log().sum() -
                         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
      if (lml > best_lml) {
        best_lml = lml;
        length_scale = ell;
        llt = chol;
        alpha = a;
      }
    }
  }

  void predict(const Eigen::VectorXd& x, double& mu, double& sigma) const {
    Eigen::MatrixXd k = kernel(X, x.transpose(), length_scale);
    mu = y_mean + y_scale * k.col(0).dot(alpha);
    Eigen::VectorXd v = llt.matrixL().solve(k.col(0));
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    sigma = y_scale * std::sqrt(var);
  }
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(double mu, double sigma, double best) {
  if (sigma <= 0.0) return std::max(0.0, mu - best);
  const double z = (mu - best) / sigma;
  return (mu - best) * normal_cdf(z) + sigma * normal_pdf(z);
}

/// Local proposals around a configuration, staying inside the space.
TunedConfig perturb(const TunedConfig& base, const SearchSpace& space, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.1);
  const std::vector<int> free = free_alpha_indices(space);
  auto a = config_alphas(base);
  if (free.size() >= 2) {
    const double free_sum = std::max(1.0 - pinned_alpha_sum(space), 0.0);
    double sum = 0.0;
    for (int idx : free) {
      auto& v = a[static_cast<std::size_t>(idx)];
      v = std::max(0.0, v + noise(rng) * free_sum);
      sum += v;
    }
    for (int idx : free) {
      auto& v = a[static_cast<std::size_t>(idx)];
      v = sum > 0.0 ? v / sum * free_sum : free_sum / static_cast<double>(free.size());
    }
  }
  TunedConfig c = with_alphas(base, a);
  if (space.lr_max > space.lr_min) {
    const double log_lr = std::log(base.max_lr) +
                          noise(rng) * (std::log(space.lr_max) - std::log(space.lr_min));
    c.max_lr = std::clamp(std::exp(log_lr), space.lr_min, space.lr_max);
  }
  std::uniform_int_distribution<int> jitter(-1, 1);
  c.hidden_layers = std::clamp(base.hidden_layers + jitter(rng), space.layers_min, space.layers_max);
  c.hidden_units =
      std::clamp(base.hidden_units + jitter(rng) * std::max(1, (space.units_max - space.units_min) / 8),
                 space.units_min, space.units_max);
  return c;
}

}  // namespace

TunedConfig sample_config(const SearchSpace& space, std::mt19937_64& rng) {
  space.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};
  const std::vector<int> free = free_alpha_indices(space);
  const double free_sum = std::max(1.0 - pinned_alpha_sum(space), 0.0);
  for (int i = 0; i < 4; ++i) {
    const auto& pin = space.alpha_pins[static_cast<std::size_t>(i)];
    if (pin) a[static_cast<std::size_t>(i)] = *pin;
  }
  if (!free.empty()) {
    double sum = 0.0;
    std::vector<double> draws(free.size());
    for (auto& d : draws) {
      d = -std::log(1.0 - unit(rng));
      sum += d;
    }
    for (std::size_t i = 0; i < free.size(); ++i) {
      a[static_cast<std::size_t>(free[i])] =
          sum > 0.0 ? draws[i] / sum * free_sum : free_sum / static_cast<double>(free.size());
    }
  }

  TunedConfig c;
  c.weights = LossWeights{a[0], a[1], a[2], a[3]};
  c.max_lr = std::exp(std::log(space.lr_min) +
                      unit(rng) * (std::log(space.lr_max) - std::log(space.lr_min)));
  std::uniform_int_distribution<int> layers(space.layers_min, space.layers_max);
  std::uniform_int_distribution<int> units(space.units_min, space.units_max);
  c.hidden_layers = layers(rng);
  c.hidden_units = units(rng);
  return c;
}

TuneResult tune(const SearchSpace& space, int budget, const TuneObjective& objective,
                std::uint64_t seed, TunerMode mode) {
  space.validate();
  if (budget < 1) {
    throw std::invalid_argument("tune: budget must be >= 1");
  }
  std::mt19937_64 rng(seed);
  const Encoder encoder(space);
  TuneResult result;

  auto run_trial = [&](const TunedConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    Trial trial;
    trial.config = config;
    trial.value = objective(config);
    trial.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trials.push_back(std::move(trial));
  };

  // Space-filling start: greedy maximin selection from a larger random pool.
  const int n_init = std::min(10, budget);
  {
    std::vector<TunedConfig> pool;
    for (int i = 0; i < 8 * n_init; ++i) pool.push_back(sample_config(space, rng));
    std::vector<Eigen::VectorXd> encoded;
    encoded.reserve(pool.size());
    for (const auto& c : pool) encoded.push_back(encoder.encode(c));

    std::vector<std::size_t> chosen{0};
    while (static_cast<int>(chosen.size()) < n_init) {
      double best_dist = -1.0;
      std::size_t best_idx = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t c : chosen) {
          nearest = std::min(nearest, (encoded[i] - encoded[c]).norm());
        }
        if (nearest > best_dist) {
          best_dist = nearest;
          best_idx = i;
        }
      }
      chosen.push_back(best_idx);
    }
    for (std::size_t idx : chosen) run_trial(pool[idx]);
  }

  while (static_cast<int>(result.trials.size()) < budget) {
    TunedConfig proposal;
    if (mode == TunerMode::RandomSearch || encoder.dim() == 0) {
      proposal = sample_config(space, rng);
    } else {
      const Eigen::Index n = static_cast<Eigen::Index>(result.trials.size());
      Eigen::MatrixXd points(n, encoder.dim());
      Eigen::VectorXd values(n);
      double best_seen = -std::numeric_limits<double>::infinity();
      std::size_t best_idx = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        points.row(i) = encoder.encode(result.trials[static_cast<std::size_t>(i)].config);
        values[i] = result.trials[static_cast<std::size_t>(i)].value;
        if (values[i] > best_seen) {
          best_seen = values[i];
          best_idx = static_cast<std::size_t>(i);
        }
      }
      GpSurrogate gp;
      gp.fit(points, values);

      std::vector<TunedConfig> candidates;
      for (int i = 0; i < 256; ++i) candidates.push_back(sample_config(space, rng));
      for (int i = 0; i < 64; ++i) {
        candidates.push_back(perturb(result.trials[best_idx].config, space, rng));
      }
      double best_ei = -std::numeric_limits<double>::infinity();
      for (const auto& candidate : candidates) {
        double mu = 0.0, sigma = 0.0;
        gp.predict(encoder.encode(candidate), mu, sigma);
        const double ei = expected_improvement(mu, sigma, best_seen);
        if (ei > best_ei) {
          best_ei = ei;
          proposal = candidate;
        }
      }
    }
    run_trial(proposal);
  }

  result.best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    if (result.trials[i].value > result.best_value) {
      result.best_value = result.trials[i].value;
      result.best_index = i;
    }
  }
  result.best = result.trials[result.best_index].config;
  return result;
}

}  // namespace pchoice
