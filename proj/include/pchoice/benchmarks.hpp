#pragma once

#include "pchoice/choice_core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pchoice {

enum class FeatureDomain { UnitHypercube, Binary };

struct ProblemSpec {
  std::string name;
  int feature_dim = 0;
  int objective_dim = 0;
  FeatureDomain domain = FeatureDomain::UnitHypercube;
};

/// The 14 benchmark problems: DTLZ1..7 (6 features, 5 objectives),
/// ZDT1..6 (6 features, 2 objectives; ZDT5 has 35 binary features) and the
/// two-parabola problem TP (2 features, 2 objectives).
const std::vector<ProblemSpec>& all_problems();

/// Throws std::invalid_argument for unknown names.
const ProblemSpec& problem_by_name(const std::string& name);

/// Objective values in the published minimization orientation.
/// Throws std::invalid_argument if x lies outside the feature domain.
Eigen::VectorXd evaluate_objectives(const ProblemSpec& spec, const Eigen::VectorXd& x);

/// Uniform draw from the feature domain: U[0,1] per coordinate, or a fair
/// coin per bit for binary domains.
Eigen::VectorXd sample_object(const ProblemSpec& spec, std::mt19937_64& rng);

/// Samples m objects and labels as chosen exactly the objects whose objective
/// vectors are non-dominated under minimization.
Sample generate_task(const ProblemSpec& spec, int m, std::mt19937_64& rng,
                     const std::string& task_id = {});

/// n_tasks independent tasks, reproducible from (spec, n_tasks, m, seed).
/// Task t is generated from its own rng seeded with split_seed(seed, t), so
/// generation order does not affect the result.
Dataset generate_dataset(const ProblemSpec& spec, int n_tasks, int m, std::uint64_t seed);

/// Sub-seed derivation: splitmix64 applied to (seed ^ golden-ratio stream of
/// the task index). Documented so external generators can reproduce tasks.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace pchoice
