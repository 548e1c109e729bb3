#include "pchoice/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pchoice {

namespace {

constexpr double kPi = std::numbers::pi;

// With 6 features and 5 objectives the DTLZ construction has
// k = 6 - 5 + 1 = 2 distance variables.
constexpr int kDtlzFeatures = 6;
constexpr int kDtlzObjectives = 5;

std::vector<ProblemSpec> make_problems() {
  std::vector<ProblemSpec> specs;
  for (int i = 1; i <= 7; ++i) {
    specs.push_back({"DTLZ" + std::to_string(i), kDtlzFeatures, kDtlzObjectives,
                     FeatureDomain::UnitHypercube});
  }
  for (int i = 1; i <= 6; ++i) {
    if (i == 5) {
      specs.push_back({"ZDT5", 35, 2, FeatureDomain::Binary});
    } else {
      specs.push_back({"ZDT" + std::to_string(i), 6, 2, FeatureDomain::UnitHypercube});
    }
  }
  specs.push_back({"TP", 2, 2, FeatureDomain::UnitHypercube});
  return specs;
}

void check_domain(const ProblemSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.feature_dim) {
    throw std::invalid_argument(spec.name + ": expected " + std::to_string(spec.feature_dim) +
                                " features, got " + std::to_string(x.size()));
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (spec.domain == FeatureDomain::Binary) {
      if (x[i] != 0.0 && x[i] != 1.0) {
        throw std::invalid_argument(spec.name + ": feature " + std::to_string(i) +
                                    " must be 0 or 1");
      }
    } else if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw std::invalid_argument(spec.name + ": feature " + std::to_string(i) +
                                  " outside [0,1]");
    }
  }
}

// Rastrigin-style multimodal distance function shared by DTLZ1 and DTLZ3.
double dtlz_g_multimodal(const Eigen::VectorXd& x, int k) {
  double g = static_cast<double>(k);
  for (Eigen::Index i = x.size() - k; i < x.size(); ++i) {
    const double t = x[i] - 0.5;
    g += t * t - std::cos(20.0 * kPi * t);
  }
  return 100.0 * g;
}

double dtlz_g_sphere(const Eigen::VectorXd& x, int k) {
  double g = 0.0;
  for (Eigen::Index i = x.size() - k; i < x.size(); ++i) {
    const double t = x[i] - 0.5;
    g += t * t;
  }
  return g;
}

Eigen::VectorXd dtlz1(const Eigen::VectorXd& x, int M, int k) {
  const double g = dtlz_g_multimodal(x, k);
  Eigen::VectorXd f(M);
  for (int j = 0; j < M; ++j) {
    double v = 0.5 * (1.0 + g);
    for (int i = 0; i < M - 1 - j; ++i) v *= x[i];
    if (j > 0) v *= 1.0 - x[M - 1 - j];
    f[j] = v;
  }
  return f;
}

// DTLZ2/3/4/5/6 share the concentric-sphere shape with angles theta.
Eigen::VectorXd dtlz_spherical(const Eigen::VectorXd& theta, double g, int M) {
  Eigen::VectorXd f(M);
  for (int j = 0; j < M; ++j) {
    double v = 1.0 + g;
    for (int i = 0; i < M - 1 - j; ++i) v *= std::cos(theta[i]);
    if (j > 0) v *= std::sin(theta[M - 1 - j]);
    f[j] = v;
  }
  return f;
}

Eigen::VectorXd dtlz_theta_linear(const Eigen::VectorXd& x, int M, double exponent) {
  Eigen::VectorXd theta(M - 1);
  for (int i = 0; i < M - 1; ++i) {
    theta[i] = std::pow(x[i], exponent) * kPi / 2.0;
  }
  return theta;
}

// DTLZ5/6 degenerate curve: all but the first angle contract with g.
Eigen::VectorXd dtlz_theta_degenerate(const Eigen::VectorXd& x, int M, double g) {
  Eigen::VectorXd theta(M - 1);
  theta[0] = x[0] * kPi / 2.0;
  const double t = kPi / (4.0 * (1.0 + g));
  for (int i = 1; i < M - 1; ++i) {
    theta[i] = t * (1.0 + 2.0 * g * x[i]);
  }
  return theta;
}

Eigen::VectorXd dtlz7(const Eigen::VectorXd& x, int M, int k) {
  double g = 0.0;
  for (Eigen::Index i = x.size() - k; i < x.size(); ++i) g += x[i];
  g = 1.0 + 9.0 * g / static_cast<double>(k);
  Eigen::VectorXd f(M);
  double h = static_cast<double>(M);
  for (int j = 0; j < M - 1; ++j) {
    f[j] = x[j];
    h -= f[j] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * f[j]));
  }
  f[M - 1] = (1.0 + g) * h;
  return f;
}

double zdt_g_linear(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  return 1.0 + 9.0 * x.tail(x.size() - 1).sum() / (n - 1.0);
}

// Bit-count utilities for ZDT5: one 30-bit variable plus one 5-bit variable.
int ones_in(const Eigen::VectorXd& x, Eigen::Index begin, Eigen::Index count) {
  int u = 0;
  for (Eigen::Index i = begin; i < begin + count; ++i) {
    u += x[i] == 1.0 ? 1 : 0;
  }
  return u;
}

Eigen::VectorXd zdt5(const Eigen::VectorXd& x) {
  const int u1 = ones_in(x, 0, 30);
  const int u2 = ones_in(x, 30, 5);
  const double f1 = 1.0 + u1;
  const double g = u2 < 5 ? 2.0 + u2 : 1.0;
  Eigen::VectorXd f(2);
  f << f1, g / f1;
  return f;
}

}  // namespace

const std::vector<ProblemSpec>& all_problems() {
  static const std::vector<ProblemSpec> specs = make_problems();
  return specs;
}

const ProblemSpec& problem_by_name(const std::string& name) {
  for (const auto& spec : all_problems()) {
    if (spec.name == name) return spec;
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

Eigen::VectorXd evaluate_objectives(const ProblemSpec& spec, const Eigen::VectorXd& x) {
  check_domain(spec, x);
  const int M = spec.objective_dim;
  const int k = spec.feature_dim - M + 1;
  if (spec.name == "DTLZ1") return dtlz1(x, M, k);
  if (spec.name == "DTLZ2")
    return dtlz_spherical(dtlz_theta_linear(x, M, 1.0), dtlz_g_sphere(x, k), M);
  if (spec.name == "DTLZ3")
    return dtlz_spherical(dtlz_theta_linear(x, M, 1.0), dtlz_g_multimodal(x, k), M);
  if (spec.name == "DTLZ4")
    return dtlz_spherical(dtlz_theta_linear(x, M, 100.0), dtlz_g_sphere(x, k), M);
  if (spec.name == "DTLZ5") {
    const double g = dtlz_g_sphere(x, k);
    return dtlz_spherical(dtlz_theta_degenerate(x, M, g), g, M);
  }
  if (spec.name == "DTLZ6") {
    double g = 0.0;
    for (Eigen::Index i = x.size() - k; i < x.size(); ++i) g += std::pow(x[i], 0.1);
    return dtlz_spherical(dtlz_theta_degenerate(x, M, g), g, M);
  }
  if (spec.name == "DTLZ7") return dtlz7(x, M, k);

  if (spec.name == "ZDT5") return zdt5(x);
  if (spec.name.rfind("ZDT", 0) == 0) {
    const double f1 = spec.name == "ZDT6"
                          ? 1.0 - std::exp(-4.0 * x[0]) * std::pow(std::sin(6.0 * kPi * x[0]), 6)
                          : x[0];
    double g = 0.0;
    if (spec.name == "ZDT4") {
      g = 1.0 + 10.0 * (x.size() - 1.0);
      for (Eigen::Index i = 1; i < x.size(); ++i) {
        g += x[i] * x[i] - 10.0 * std::cos(4.0 * kPi * x[i]);
      }
    } else if (spec.name == "ZDT6") {
      g = 1.0 + 9.0 * std::pow(x.tail(x.size() - 1).sum() / (x.size() - 1.0), 0.25);
    } else {
      g = zdt_g_linear(x);
    }
    double h = 0.0;
    if (spec.name == "ZDT1" || spec.name == "ZDT4") {
      h = 1.0 - std::sqrt(f1 / g);
    } else if (spec.name == "ZDT2" || spec.name == "ZDT6") {
      h = 1.0 - (f1 / g) * (f1 / g);
    } else {  // ZDT3
      h = 1.0 - std::sqrt(f1 / g) - (f1 / g) * std::sin(10.0 * kPi * f1);
    }
    Eigen::VectorXd f(2);
    f << f1, g * h;
    return f;
  }

  if (spec.name == "TP") {
    Eigen::VectorXd f(2);
    f << (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1],
        (x[0] + 1.0) * (x[0] + 1.0) + x[1] * x[1];
    return f;
  }
  throw std::invalid_argument("unknown problem '" + spec.name + "'");
}

Eigen::VectorXd sample_object(const ProblemSpec& spec, std::mt19937_64& rng) {
  Eigen::VectorXd x(spec.feature_dim);
  if (spec.domain == FeatureDomain::Binary) {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = coin(rng) ? 1.0 : 0.0;
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unit(rng);
  }
  return x;
}

Sample generate_task(const ProblemSpec& spec, int m, std::mt19937_64& rng,
                     const std::string& task_id) {
  if (m < 1) {
    throw std::invalid_argument("generate_task: m must be >= 1");
  }
  Sample sample;
  sample.task.task_id = task_id;
  sample.task.features.resize(m, spec.feature_dim);
  Eigen::MatrixXd objectives(m, spec.objective_dim);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd x = sample_object(spec, rng);
    sample.task.features.row(i) = x.transpose();
    objectives.row(i) = evaluate_objectives(spec, x).transpose();
  }
  // The published problems minimize; core dominance maximizes. Negating the
  // objective vectors makes the mask the minimization-Pareto front.
  sample.choice = pareto_front(-objectives);
  return sample;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the golden-gamma stream starting at seed.
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Dataset generate_dataset(const ProblemSpec& spec, int n_tasks, int m, std::uint64_t seed) {
  if (n_tasks < 1) {
    throw std::invalid_argument("generate_dataset: n_tasks must be >= 1");
  }
  Dataset data;
  data.meta.problem = spec.name;
  data.meta.seed = seed;
  data.meta.feature_dim = spec.feature_dim;
  data.samples.reserve(static_cast<std::size_t>(n_tasks));
  for (int t = 0; t < n_tasks; ++t) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(t)));
    std::string id = spec.name + "-" + std::to_string(seed) + "-" + std::to_string(t);
    Sample sample = generate_task(spec, m, rng, id);
    data.meta.total_objects += m;
    for (auto bit : sample.choice) data.meta.total_chosen += bit;
    data.samples.push_back(std::move(sample));
  }
  return data;
}

}  // namespace pchoice
