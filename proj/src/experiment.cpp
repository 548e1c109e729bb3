#include "pchoice/experiment.hpp"

#include "pchoice/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace pchoice {

FitFunction make_tuned_fit(const TrainConfig& base, const SearchSpace& space, int budget,
                           TunerMode mode, int output_dim) {
  return [base, space, budget, mode, output_dim](const Dataset& train_set, const Dataset& val_set,
                                                 std::uint64_t seed) {
    auto config_for = [&](const TunedConfig& tuned) {
      TrainConfig tc = base;
      tc.weights = tuned.weights;
      tc.max_lr = tuned.max_lr;
      tc.seed = seed;
      ArchSpec arch;
      arch.input_dim = static_cast<int>(train_set.samples.front().task.feature_dim());
      arch.hidden_layers = tuned.hidden_layers;
      arch.hidden_units = tuned.hidden_units;
      arch.output_dim = output_dim;
      return std::make_pair(tc, arch);
    };

    const TuneObjective objective = [&](const TunedConfig& tuned) {
      const auto [tc, arch] = config_for(tuned);
      try {
        const TrainReport report = train(train_set, nullptr, arch, tc);
        return evaluate(val_set, report.final_params).mean;
      } catch (const TrainingDiverged&) {
        return 0.0;  // a diverging configuration is simply a bad trial
      }
    };

    const TuneResult tuned = tune(space, budget, objective, seed, mode);
    const auto [tc, arch] = config_for(tuned.best);
    return train(train_set, nullptr, arch, tc).final_params;
  };
}

int env_thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("PARETO_CHOICE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) {
      cap = static_cast<int>(parsed);
    }
  }
  return cap;
}

std::vector<ProblemSummary> run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(const std::vector<ProblemSummary>&)>& on_done) {
  if (cfg.problems.empty()) {
    throw std::invalid_argument("run_experiment: no problems given");
  }

  struct Job {
    std::string problem;
    bool no_mds = false;
  };
  std::vector<Job> jobs;
  for (const auto& problem : cfg.problems) {
    jobs.push_back({problem, false});
    if (cfg.ablate_mds) jobs.push_back({problem, true});
  }

  std::vector<ProblemSummary> results(jobs.size());
  std::vector<char> done(jobs.size(), 0);
  std::mutex flush_mutex;
  std::size_t flushed = 0;

  auto run_job = [&](std::size_t index) {
    const Job& job = jobs[index];
    const ProblemSpec& spec = problem_by_name(job.problem);
    // Each problem draws its dataset from a problem-specific sub-seed so the
    // set of problems in a run does not change any single problem's data.
    const std::uint64_t data_seed = split_seed(cfg.seed, fnv1a64(job.problem));
    const Dataset data = generate_dataset(spec, cfg.n_tasks, cfg.m, data_seed);

    SearchSpace space = cfg.space;
    if (job.no_mds) space.alpha_pins[2] = 0.0;
    const FitFunction fit =
        make_tuned_fit(cfg.train_base, space, cfg.tuning_budget, cfg.tuner_mode, cfg.output_dim);

    ProblemSummary summary;
    summary.problem = job.problem;
    summary.arm = job.no_mds ? "no_mds" : "full";
    summary.result = monte_carlo_cv(data, cfg.reps, cfg.test_frac, cfg.val_frac, fit, data_seed);
    results[index] = std::move(summary);

    if (on_done) {
      std::lock_guard<std::mutex> lock(flush_mutex);
      done[index] = 1;
      // Flush the deterministic prefix of completed jobs.
      while (flushed < done.size() && done[flushed]) ++flushed;
      std::vector<ProblemSummary> prefix(results.begin(),
                                         results.begin() + static_cast<std::ptrdiff_t>(flushed));
      on_done(prefix);
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          try {
            run_job(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& worker : pool) worker.join();
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

}  // namespace pchoice
