// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria can be selected by number on the command line; criterion 9
// re-runs the desk-scale pipeline and compares every reported number bitwise.
#include "pchoice/benchmarks.hpp"
#include "pchoice/evaluation.hpp"
#include "pchoice/experiment.hpp"
#include "pchoice/io.hpp"
#include "pchoice/losses.hpp"
#include "pchoice/training.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstring>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pchoice;

namespace {

struct CritOutput {
  bool pass = false;
  std::string detail;
  std::vector<double> numbers;  // everything criterion 9 must reproduce bitwise
};

constexpr std::uint64_t kDeskSeed = 20260809;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

// ---------------------------------------------------------------- criterion 1

CritOutput criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const LossWeights w{0.3, 0.3, 0.25, 0.15};
  const double h = 1e-5;
  const double tol = 1e-4;

  int checked_coords = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 9;        // 2..10
    const int dp = 1 + trial % 3;       // 1..3
    const int layers = trial % 3;       // 0..2 hidden layers
    const int units = std::vector<int>{4, 8, 16, 32}[static_cast<std::size_t>(trial % 4)];
    const int dim = 2 + trial % 4;

    // Resample until the configuration is away from every kink.
    ChoiceTask task;
    ChoiceMask c;
    NetworkParams params;
    for (std::uint64_t attempt = 0;; ++attempt) {
      task.features = oracle::random_matrix(m, dim, rng, 1.0);
      c = oracle::random_mask(static_cast<std::size_t>(m), rng);
      if (std::accumulate(c.begin(), c.end(), 0) == 0) continue;
      params = init_params(dim, layers, units, dp,
                           1000 + static_cast<std::uint64_t>(trial) * 131 + attempt);
      NetworkParams probe = params;
      ForwardTrace trace;
      const Embedding z = forward(task.features, probe, ForwardMode::Train, &trace);
      if (oracle::trace_kink_margin(trace) < 1e-3) continue;
      if (oracle::loss_kink_margin(task.features, z, c) < 1e-3) continue;
      break;
    }

    auto loss_at = [&](NetworkParams& p) {
      NetworkParams work = p;
      const Embedding z = forward(task.features, work, ForwardMode::Train);
      return loss_total(task, z, c, w).total;
    };

    // analytic gradients
    NetworkParams work = params;
    ForwardTrace trace;
    const Embedding z = forward(task.features, work, ForwardMode::Train, &trace);
    const Eigen::MatrixXd grad_z = loss_grad(task, z, c, w);
    ParamGrads grads = backward(trace, params, grad_z);

    // w.r.t. every parameter
    auto pb = oracle::param_blocks(params);
    auto gb = oracle::grad_blocks(grads);
    for (std::size_t b = 0; b < pb.size(); ++b) {
      for (Eigen::Index i = 0; i < pb[b].size; ++i) {
        double& slot = pb[b].data[i];
        const double saved = slot;
        slot = saved + h;
        const double up = loss_at(params);
        slot = saved - h;
        const double down = loss_at(params);
        slot = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = oracle::rel_error(gb[b].data[i], numeric);
        worst = std::max(worst, err);
        ++checked_coords;
        if (err > tol) {
          CritOutput out;
          out.detail = "parameter gradient mismatch (rel err " + fmt(err) + ") at trial " +
                       std::to_string(trial);
          return out;
        }
      }
    }

    // w.r.t. the embedded points (the network stays fixed)
    Eigen::MatrixXd z_work = z;
    for (Eigen::Index i = 0; i < z_work.rows(); ++i) {
      for (Eigen::Index k = 0; k < z_work.cols(); ++k) {
        const double numeric = oracle::central_difference(
            [&] { return loss_total(task, z_work, c, w).total; }, z_work(i, k), h);
        const double err = oracle::rel_error(grad_z(i, k), numeric);
        worst = std::max(worst, err);
        ++checked_coords;
        if (err > tol) {
          CritOutput out;
          out.detail = "embedding gradient mismatch (rel err " + fmt(err) + ") at trial " +
                       std::to_string(trial);
          return out;
        }
      }
    }
  }

  const double elapsed = seconds_since(t0);
  CritOutput out;
  out.pass = elapsed < 60.0;
  out.detail = "100 configurations, " + std::to_string(checked_coords) +
               " coordinates, worst rel err " + fmt(worst) + ", " + fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------- criterion 2

CritOutput criterion_2() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> delta_dist(1.2, 2.0);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::uniform_int_distribution<int> m_dist(2, 12);
  const LossWeights w{0.5, 0.5, 0.0, 0.0};  // alpha_1, alpha_2 > 0

  int verified = 0;
  while (verified < 50) {
    const int m = m_dist(rng);
    std::uniform_int_distribution<int> chosen_dist(1, m);
    const int chosen = chosen_dist(rng);
    const double delta = delta_dist(rng);
    Eigen::MatrixXd z(m, 2);
    for (int s = 0; s < chosen; ++s) {
      z.row(s) << s * delta + jitter(rng), -s * delta + jitter(rng);
    }
    std::uniform_int_distribution<int> anchor_dist(0, chosen - 1);
    for (int i = chosen; i < m; ++i) {
      z.row(i) = z.row(anchor_dist(rng)).array() - delta - std::abs(jitter(rng));
    }
    ChoiceMask c(static_cast<std::size_t>(m), 0);
    for (int s = 0; s < chosen; ++s) c[static_cast<std::size_t>(s)] = 1;

    if (loss_po(z, c) != 0.0 || loss_dom(z, c) != 0.0) continue;
    ChoiceTask task;
    task.features = Eigen::MatrixXd::Zero(m, 1);
    const LossBreakdown b = loss_total(task, z, c, w);
    if (b.total != 0.0) continue;
    if (pareto_front(z) != c) {
      CritOutput out;
      out.detail = "zero-loss embedding whose front differs from the mask (m=" +
                   std::to_string(m) + ")";
      return out;
    }
    ++verified;
  }
  CritOutput out;
  out.pass = true;
  out.detail = "50 zero-loss constructions all reproduce their masks exactly";
  return out;
}

// ---------------------------------------------------------------- criterion 3

CritOutput criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> m_dist(1, 20);
  std::uniform_int_distribution<int> d_dist(1, 4);
  for (int trial = 0; trial < 10000; ++trial) {
    const int m = m_dist(rng);
    const int dp = d_dist(rng);
    Eigen::MatrixXd z = oracle::random_matrix(m, dp, rng);
    if (m >= 2 && trial % 4 == 0) {
      std::uniform_int_distribution<int> pick(0, m - 1);
      z.row(pick(rng)) = z.row(pick(rng));  // inject duplicate rows
    }
    if (pareto_front(z) != oracle::front_max(z)) {
      CritOutput out;
      out.detail = "front mismatch against the independent scan at trial " + std::to_string(trial);
      return out;
    }
  }
  const double elapsed = seconds_since(t0);
  CritOutput out;
  out.pass = elapsed < 60.0;
  out.detail = "10000 random fronts (m<=20, d'<=4, with duplicates) match the oracle, " +
               fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------- criterion 4

CritOutput criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = generate_dataset(problem_by_name("ZDT1"), 40960, 10, kDeskSeed);
  const double gen_seconds = seconds_since(t0);

  CritOutput out;
  if (data.samples.size() != 40960) {
    out.detail = "expected 40960 tasks";
    return out;
  }
  for (const auto& s : data.samples) {
    if (s.task.size() != 10 || s.task.feature_dim() != 6) {
      out.detail = "task shape violation";
      return out;
    }
  }
  const SplitSizes sizes = cv_split_sizes(static_cast<int>(data.samples.size()), 0.1, 1.0 / 9.0);
  const CvSplit split = cv_split(static_cast<int>(data.samples.size()), 0.1, 1.0 / 9.0, 77, 0);
  const bool split_ok = sizes.test == 4096 && sizes.val == 4096 && sizes.train == 32768 &&
                        split.test.size() == 4096 && split.val.size() == 4096 &&
                        split.train.size() == 32768;
  const std::uint64_t fp = fnv1a64(serialize_dataset(data));

  out.numbers = {static_cast<double>(data.samples.size()),
                 static_cast<double>(sizes.test),
                 static_cast<double>(sizes.val),
                 static_cast<double>(sizes.train),
                 static_cast<double>(fp & 0xFFFFFFFFULL),
                 static_cast<double>(fp >> 32),
                 static_cast<double>(data.meta.total_chosen)};
  out.pass = split_ok && gen_seconds < 120.0;
  out.detail = "N=40960, m=10, d=6, split 4096/4096/32768, fingerprint " + hex64(fp) +
               ", generated in " + fmt(gen_seconds) + "s";
  return out;
}

// ---------------------------------------------------------------- criterion 5

CritOutput criterion_5() {
  const Dataset data = generate_dataset(problem_by_name("ZDT1"), 2048, 10, 505);
  const double estimate = random_baseline(data, 0.5, 10000, 506);
  CritOutput out;
  out.numbers = {estimate};
  out.pass = estimate >= 0.48 && estimate <= 0.52;
  out.detail = "Bernoulli(0.5) mean A-mean " + fmt(estimate) + " over 10000 task-trials";
  return out;
}

// ------------------------------------------------------- desk-scale criteria

ExperimentConfig desk_config(std::vector<std::string> problems, bool ablate) {
  ExperimentConfig cfg;
  cfg.problems = std::move(problems);
  cfg.n_tasks = 2048;
  cfg.m = 10;
  cfg.seed = kDeskSeed;
  cfg.reps = 3;
  cfg.test_frac = 0.1;
  cfg.val_frac = 1.0 / 9.0;
  cfg.tuning_budget = 12;   // <= 15 per the criterion
  cfg.output_dim = 2;
  cfg.train_base.epochs = 60;  // <= 100 per the criterion
  cfg.train_base.batch_size = 64;
  cfg.space.lr_min = 1e-3;
  cfg.space.lr_max = 1e-1;
  cfg.space.layers_min = 1;
  cfg.space.layers_max = 2;
  cfg.space.units_min = 8;
  cfg.space.units_max = 64;
  cfg.ablate_mds = ablate;
  cfg.threads = env_thread_cap();
  return cfg;
}

CritOutput criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = run_experiment(desk_config({"TP", "ZDT1"}, false));
  CritOutput out;
  out.pass = true;
  std::ostringstream detail;
  for (const auto& r : results) {
    out.numbers.push_back(r.result.mean);
    out.numbers.push_back(r.result.stddev);
    if (r.result.mean < 0.80) out.pass = false;
    detail << r.problem << "=" << fmt(r.result.mean) << " ";
  }
  detail << "(threshold 0.80, " << fmt(seconds_since(t0)) << "s)";
  out.detail = detail.str();
  return out;
}

// Criteria 7 and 8 share one paired run over all 14 problems.
std::vector<ProblemSummary> desk_all_problems() {
  std::vector<std::string> names;
  for (const auto& spec : all_problems()) names.push_back(spec.name);
  return run_experiment(desk_config(names, true));
}

CritOutput criterion_7(const std::vector<ProblemSummary>& results, double elapsed) {
  CritOutput out;
  out.pass = true;
  std::ostringstream detail;
  double worst = 1.0;
  std::string worst_name;
  for (const auto& r : results) {
    if (r.arm != "full") continue;
    out.numbers.push_back(r.result.mean);
    if (r.result.mean < worst) {
      worst = r.result.mean;
      worst_name = r.problem;
    }
    if (r.result.mean < 0.55) out.pass = false;
  }
  detail << "14 problems, min mean A-mean " << fmt(worst) << " (" << worst_name
         << "), threshold 0.55, " << fmt(elapsed) << "s";
  out.detail = detail.str();
  return out;
}

CritOutput criterion_8(const std::vector<ProblemSummary>& results) {
  std::map<std::string, double> full, nomds;
  for (const auto& r : results) {
    (r.arm == "full" ? full : nomds)[r.problem] = r.result.mean;
  }
  CritOutput out;
  int wins = 0, losses = 0;
  for (const auto& [problem, mean] : full) {
    const double nm = nomds.at(problem);
    out.numbers.push_back(nm);
    out.numbers.push_back(mean - nm);
    if (mean > nm) ++wins;
    if (mean < nm) ++losses;
  }
  const double tp_gap = nomds.at("TP") - full.at("TP");
  const bool tp_ok = tp_gap <= 0.02;
  const bool majority = wins > losses;
  out.pass = tp_ok && majority;
  std::ostringstream detail;
  detail << "full arm wins " << wins << "/" << losses << " paired comparisons"
         << "; TP no-MDS gap " << fmt(tp_gap) << " (limit 0.02)";
  out.detail = detail.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> requested;
  for (int i = 1; i < argc; ++i) {
    requested.push_back(std::atoi(argv[i]));
  }
  if (requested.empty()) requested = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  std::map<int, CritOutput> cache;
  double desk_elapsed = 0.0;
  std::vector<ProblemSummary> desk_results;
  bool desk_ready = false;

  auto ensure_desk = [&] {
    if (!desk_ready) {
      const auto t0 = std::chrono::steady_clock::now();
      desk_results = desk_all_problems();
      desk_elapsed = seconds_since(t0);
      desk_ready = true;
    }
  };

  auto run = [&](int id) -> CritOutput {
    switch (id) {
      case 1: return criterion_1();
      case 2: return criterion_2();
      case 3: return criterion_3();
      case 4: return criterion_4();
      case 5: return criterion_5();
      case 6: return criterion_6();
      case 7: ensure_desk(); return criterion_7(desk_results, desk_elapsed);
      case 8: ensure_desk(); return criterion_8(desk_results);
      default: return {};
    }
  };

  auto get = [&](int id) -> const CritOutput& {
    auto found = cache.find(id);
    if (found == cache.end()) {
      found = cache.emplace(id, run(id)).first;
    }
    return found->second;
  };

  static const char* kDescriptions[] = {
      "",
      "gradient correctness (loss through network vs central differences)",
      "zero-loss soundness (margin-satisfying embeddings reproduce masks)",
      "front extraction matches the independent dominance scan",
      "dataset protocol fidelity (40960 tasks, 90/10 and 1/9 splits)",
      "random baseline scores 0.50 +/- 0.02",
      "desk-scale learning on TP and ZDT1 reaches 0.80",
      "desk-scale learning beats 0.55 on all 14 problems",
      "removing the MDS term does not help (paired ablation)",
      "criteria 4-8 reproduce bitwise under identical seeds",
  };

  bool all_pass = true;
  for (int id : requested) {
    if (id < 1 || id > 9) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    CritOutput out;
    if (id == 9) {
      // First runs (cached when already produced above), then fresh re-runs.
      out.pass = true;
      std::ostringstream detail;
      for (int dep : {4, 5, 6}) {
        const CritOutput first = get(dep);
        const CritOutput second = run(dep);
        const bool same = second.numbers == first.numbers && !first.numbers.empty();
        if (!same) out.pass = false;
        detail << dep << ":" << (same ? "ok " : "DIFF ");
      }
      {
        const std::vector<double> first7 = get(7).numbers;
        const std::vector<double> first8 = get(8).numbers;
        // one fresh desk-scale pass re-derives both 7 and 8
        const auto t0 = std::chrono::steady_clock::now();
        const auto fresh = desk_all_problems();
        const double fresh_elapsed = seconds_since(t0);
        const bool same7 = criterion_7(fresh, fresh_elapsed).numbers == first7;
        const bool same8 = criterion_8(fresh).numbers == first8;
        if (!same7 || !same8) out.pass = false;
        detail << "7:" << (same7 ? "ok " : "DIFF ") << "8:" << (same8 ? "ok" : "DIFF");
      }
      out.detail = detail.str();
    } else {
      out = get(id);
    }
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << kDescriptions[id]
              << " -- " << out.detail << "\n";
    std::cout.flush();
    if (!out.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
