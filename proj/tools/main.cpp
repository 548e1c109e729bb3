#include "pchoice/benchmarks.hpp"
#include "pchoice/experiment.hpp"
#include "pchoice/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace pchoice;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct GenerateArgs {
  std::string problem;
  int tasks = 1024;
  int size = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& args) {
  const ProblemSpec& spec = problem_by_name(args.problem);
  const Dataset data = generate_dataset(spec, args.tasks, args.size, args.seed);
  save_dataset(args.out, data);
  std::cout << "wrote " << data.samples.size() << " tasks to " << args.out
            << " (fingerprint " << dataset_fingerprint(data) << ")\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string val;
  std::string out;
  std::string log;
  int embed_dim = 2;
  int hidden_layers = 1;
  int hidden_units = 32;
  bool bn_before_activation = false;
  bool dom_chosen_only = false;
  std::string optimizer = "adam";
  double alpha_po = 0.4;
  double alpha_dom = 0.4;
  double alpha_mds = 0.15;
  double alpha_l2 = 0.05;
  TrainConfig cfg;
};

int cmd_train(const TrainArgs& args) {
  const Dataset data = load_dataset(args.data);
  Dataset val;
  const bool has_val = !args.val.empty();
  if (has_val) val = load_dataset(args.val);

  TrainConfig cfg = args.cfg;
  cfg.weights = LossWeights::normalized(args.alpha_po, args.alpha_dom, args.alpha_mds, args.alpha_l2);
  cfg.dom_neighborhood =
      args.dom_chosen_only ? DomNeighborhood::ChosenOnly : DomNeighborhood::AllOthers;
  cfg.optimizer = args.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;

  ArchSpec arch;
  arch.input_dim = data.meta.feature_dim != 0
                       ? data.meta.feature_dim
                       : static_cast<int>(data.samples.front().task.feature_dim());
  arch.hidden_layers = args.hidden_layers;
  arch.hidden_units = args.hidden_units;
  arch.output_dim = args.embed_dim;
  arch.bn_placement = args.bn_before_activation ? BatchNormPlacement::BeforeActivation
                                                : BatchNormPlacement::AfterActivation;

  const TrainReport report = train(data, has_val ? &val : nullptr, arch, cfg);

  ModelFile model;
  model.params = report.final_params;
  model.train_config = cfg;
  model.dataset_fingerprint = dataset_fingerprint(data);
  save_model(args.out, model);
  if (!args.log.empty()) {
    write_file_atomic(args.log, training_log_csv(report));
  }
  std::cout << "trained " << cfg.epochs << " epochs (" << report.total_steps << " steps, "
            << format_double(report.wall_seconds) << "s); final loss "
            << format_double(report.epochs.back().mean_loss.total) << "; model " << args.out
            << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string split = "test";
  int repetition = 0;
};

int cmd_eval(const EvalArgs& args) {
  const ModelFile model = load_model(args.model);
  const Dataset data = load_dataset(args.data);
  EvalReport report = evaluate(data, model.params);
  report.split = args.split;
  report.repetition = args.repetition;
  if (!args.out.empty()) {
    write_file_atomic(args.out, eval_report_csv({report}));
  }
  std::cout << "mean A-mean " << format_double(report.mean) << " over " << report.per_task.size()
            << " tasks (sd " << format_double(report.stddev) << "); data fingerprint "
            << dataset_fingerprint(data) << ", model trained on " << model.dataset_fingerprint
            << "\n";
  return kExitOk;
}

struct BaselineArgs {
  std::string data;
  double p = 0.5;
  int trials = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_baseline(const BaselineArgs& args) {
  const Dataset data = load_dataset(args.data);
  EvalReport report;
  report.problem = data.meta.problem;
  report.split = "baseline";
  report.repetition = 0;
  report.seed = args.seed;
  report.mean = random_baseline(data, args.p, args.trials, args.seed, &report.per_task);
  report.stddev = sample_stddev(report.per_task, report.mean);
  if (!args.out.empty()) {
    write_file_atomic(args.out, eval_report_csv({report}));
  }
  std::cout << "random baseline (p=" << format_double(args.p) << ") mean A-mean "
            << format_double(report.mean) << " over " << args.trials << " task-trials\n";
  return kExitOk;
}

struct TuneArgs {
  std::string data;
  int budget = 60;
  double val_frac = 1.0 / 9.0;
  std::uint64_t seed = 0;
  std::string out;
  bool pin_mds_zero = false;
  bool random_search = false;
  int embed_dim = 2;
  TrainConfig base;
};

std::string trial_log_csv(const TuneResult& result) {
  std::string out =
      "trial,alpha_po,alpha_dom,alpha_mds,alpha_l2,max_lr,hidden_layers,hidden_units,"
      "val_a_mean,seconds\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const Trial& t = result.trials[i];
    out += std::to_string(i);
    out += ',' + format_double(t.config.weights.po);
    out += ',' + format_double(t.config.weights.dom);
    out += ',' + format_double(t.config.weights.mds);
    out += ',' + format_double(t.config.weights.l2);
    out += ',' + format_double(t.config.max_lr);
    out += ',' + std::to_string(t.config.hidden_layers);
    out += ',' + std::to_string(t.config.hidden_units);
    out += ',' + format_double(t.value);
    out += ',' + format_double(t.wall_seconds);
    out += '\n';
  }
  return out;
}

int cmd_tune(const TuneArgs& args) {
  const Dataset data = load_dataset(args.data);
  // Hold out a validation slice; the rest is tuning-time training data.
  const int n = static_cast<int>(data.samples.size());
  const int n_val = static_cast<int>(std::llround(args.val_frac * n));
  if (n_val < 1 || n_val >= n) {
    throw std::invalid_argument("tune: --val-frac leaves an empty split");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(split_seed(args.seed, 0x7A11));
  std::shuffle(order.begin(), order.end(), rng);
  Dataset train_set, val_set;
  train_set.meta = val_set.meta = data.meta;
  for (int i = 0; i < n; ++i) {
    (i < n_val ? val_set : train_set)
        .samples.push_back(data.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  }

  SearchSpace space;
  if (args.pin_mds_zero) space.alpha_pins[2] = 0.0;
  const TunerMode mode = args.random_search ? TunerMode::RandomSearch : TunerMode::GaussianProcess;

  TuneObjective objective = [&](const TunedConfig& tuned) {
    TrainConfig tc = args.base;
    tc.weights = tuned.weights;
    tc.max_lr = tuned.max_lr;
    tc.seed = args.seed;
    ArchSpec arch;
    arch.input_dim = static_cast<int>(train_set.samples.front().task.feature_dim());
    arch.hidden_layers = tuned.hidden_layers;
    arch.hidden_units = tuned.hidden_units;
    arch.output_dim = args.embed_dim;
    try {
      return evaluate(val_set, train(train_set, nullptr, arch, tc).final_params).mean;
    } catch (const TrainingDiverged&) {
      return 0.0;
    }
  };
  const TuneResult result = tune(space, args.budget, objective, args.seed, mode);
  if (!args.out.empty()) {
    write_file_atomic(args.out, trial_log_csv(result));
  }
  std::cout << "best validation A-mean " << format_double(result.best_value) << " at trial "
            << result.best_index << ": alpha=(" << format_double(result.best.weights.po) << ","
            << format_double(result.best.weights.dom) << ","
            << format_double(result.best.weights.mds) << ","
            << format_double(result.best.weights.l2) << ") max_lr="
            << format_double(result.best.max_lr) << " layers=" << result.best.hidden_layers
            << " units=" << result.best.hidden_units << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::vector<std::string> problems;
  std::string out_csv = "summary.csv";
  std::string out_svg = "summary.svg";
  bool ablate = false;
  bool random_search = false;
  ExperimentConfig cfg;
};

std::string summary_csv(const std::vector<ProblemSummary>& summaries, int n_tasks) {
  std::string out = "problem,arm,repetitions,n_tasks,mean_a_mean,std_a_mean\n";
  for (const auto& s : summaries) {
    out += s.problem;
    out += ',' + s.arm;
    out += ',' + std::to_string(s.result.reports.size());
    out += ',' + std::to_string(n_tasks);
    out += ',' + format_double(s.result.mean);
    out += ',' + format_double(s.result.stddev);
    out += '\n';
  }
  return out;
}

int cmd_experiment(ExperimentArgs& args) {
  args.cfg.problems = args.problems;
  args.cfg.ablate_mds = args.ablate;
  args.cfg.tuner_mode = args.random_search ? TunerMode::RandomSearch : TunerMode::GaussianProcess;
  args.cfg.threads = env_thread_cap();

  auto flush = [&](const std::vector<ProblemSummary>& done) {
    write_file_atomic(args.out_csv, summary_csv(done, args.cfg.n_tasks));
    std::vector<BarItem> bars;
    for (const auto& s : done) {
      bars.push_back({s.problem, args.cfg.ablate_mds ? s.arm : std::string{}, s.result.mean,
                      s.result.stddev});
    }
    write_file_atomic(args.out_svg, render_bar_chart(bars, "Mean test A-mean per problem"));
  };

  const std::vector<ProblemSummary> summaries = run_experiment(args.cfg, flush);
  flush(summaries);
  for (const auto& s : summaries) {
    std::cout << s.problem << " [" << s.arm << "] mean A-mean " << format_double(s.result.mean)
              << " (sd " << format_double(s.result.stddev) << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning choice functions as Pareto-optimal sets of learned utility embeddings"};
  app.set_config("--config", "", "Key=value file; sections [generate], [train], ... per subcommand");
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Generate a benchmark choice dataset");
  generate->add_option("--problem", gen.problem, "Problem name (DTLZ1..7, ZDT1..6, TP)")->required();
  generate->add_option("--tasks", gen.tasks, "Number of tasks");
  generate->add_option("--size", gen.size, "Objects per task");
  generate->add_option("--seed", gen.seed, "Generation seed");
  generate->add_option("--out", gen.out, "Output JSONL path")->required();

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train an embedding model on a dataset");
  train_cmd->add_option("--data", tr.data, "Training dataset (JSONL)")->required();
  train_cmd->add_option("--val", tr.val, "Optional validation dataset (JSONL)");
  train_cmd->add_option("--out", tr.out, "Output model path (JSON)")->required();
  train_cmd->add_option("--log", tr.log, "Training log CSV path");
  train_cmd->add_option("--epochs", tr.cfg.epochs, "Training epochs");
  train_cmd->add_option("--batch", tr.cfg.batch_size, "Tasks per mini-batch");
  train_cmd->add_option("--max-lr", tr.cfg.max_lr, "Peak cyclical learning rate");
  train_cmd->add_option("--base-lr-fraction", tr.cfg.base_lr_fraction, "Base LR as fraction of peak");
  train_cmd->add_option("--cycle-steps", tr.cfg.cycle_length_steps,
                        "Cycle length in steps (0 = two epochs)");
  train_cmd->add_option("--alpha-po", tr.alpha_po, "Weight of the Pareto-optimality loss");
  train_cmd->add_option("--alpha-dom", tr.alpha_dom, "Weight of the dominance loss");
  train_cmd->add_option("--alpha-mds", tr.alpha_mds, "Weight of the MDS stress");
  train_cmd->add_option("--alpha-l2", tr.alpha_l2, "Weight of the L2 pull to the origin");
  train_cmd->add_option("--embed-dim", tr.embed_dim, "Embedding dimensions d'");
  train_cmd->add_option("--hidden-layers", tr.hidden_layers, "Hidden layers");
  train_cmd->add_option("--hidden-units", tr.hidden_units, "Units per hidden layer");
  train_cmd->add_option("--optimizer", tr.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}));
  train_cmd->add_option("--seed", tr.cfg.seed, "Training seed");
  train_cmd->add_flag("--dom-chosen-only", tr.dom_chosen_only,
                      "Restrict the dominance loss to chosen dominators");
  train_cmd->add_flag("--bn-before-activation", tr.bn_before_activation,
                      "Place batch norm before the ReLU");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  eval_cmd->add_option("--model", ev.model, "Model path")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset path")->required();
  eval_cmd->add_option("--out", ev.out, "Report CSV path");
  eval_cmd->add_option("--split", ev.split, "Split label for the report");
  eval_cmd->add_option("--repetition", ev.repetition, "Repetition label for the report");

  BaselineArgs bl;
  CLI::App* baseline_cmd = app.add_subcommand("baseline", "Random Bernoulli(p) baseline");
  baseline_cmd->add_option("--data", bl.data, "Dataset path")->required();
  baseline_cmd->add_option("--p", bl.p, "Inclusion probability")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  baseline_cmd->add_option("--trials", bl.trials, "Task-trials to average");
  baseline_cmd->add_option("--seed", bl.seed, "Sampling seed");
  baseline_cmd->add_option("--out", bl.out, "Report CSV path");

  TuneArgs tu;
  CLI::App* tune_cmd = app.add_subcommand("tune", "Hyperparameter search on a dataset");
  tune_cmd->add_option("--data", tu.data, "Dataset path")->required();
  tune_cmd->add_option("--budget", tu.budget, "Objective evaluations");
  tune_cmd->add_option("--val-frac", tu.val_frac, "Held-out validation fraction");
  tune_cmd->add_option("--seed", tu.seed, "Tuning seed");
  tune_cmd->add_option("--out", tu.out, "Trial log CSV path");
  tune_cmd->add_option("--epochs", tu.base.epochs, "Epochs per trial");
  tune_cmd->add_option("--batch", tu.base.batch_size, "Tasks per mini-batch");
  tune_cmd->add_option("--embed-dim", tu.embed_dim, "Embedding dimensions d'");
  tune_cmd->add_flag("--pin-mds", tu.pin_mds_zero, "Pin the MDS weight to zero");
  tune_cmd->add_flag("--random-search", tu.random_search, "Use pure random search");

  ExperimentArgs ex;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "Generate, tune and cross-validate per problem");
  experiment_cmd
      ->add_option("--problems", ex.problems, "Problem names (comma separated or repeated)")
      ->required()
      ->delimiter(',');
  experiment_cmd->add_option("--tasks", ex.cfg.n_tasks, "Tasks per problem");
  experiment_cmd->add_option("--size", ex.cfg.m, "Objects per task");
  experiment_cmd->add_option("--seed", ex.cfg.seed, "Master seed");
  experiment_cmd->add_option("--reps", ex.cfg.reps, "Cross-validation repetitions");
  experiment_cmd->add_option("--test-frac", ex.cfg.test_frac, "Test fraction");
  experiment_cmd->add_option("--val-frac", ex.cfg.val_frac, "Validation fraction of the rest");
  experiment_cmd->add_option("--budget", ex.cfg.tuning_budget, "Tuning budget per repetition");
  experiment_cmd->add_option("--epochs", ex.cfg.train_base.epochs, "Epochs per training run")
      ->default_val(60);
  experiment_cmd->add_option("--batch", ex.cfg.train_base.batch_size, "Tasks per mini-batch");
  experiment_cmd->add_option("--embed-dim", ex.cfg.output_dim, "Embedding dimensions d'");
  experiment_cmd->add_option("--out-csv", ex.out_csv, "Summary CSV path");
  experiment_cmd->add_option("--out-svg", ex.out_svg, "Bar chart SVG path");
  experiment_cmd->add_flag("--ablate-mds", ex.ablate, "Add a paired arm with the MDS weight pinned to 0");
  experiment_cmd->add_flag("--random-search", ex.random_search, "Use pure random search for tuning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (baseline_cmd->parsed()) return cmd_baseline(bl);
    if (tune_cmd->parsed()) return cmd_tune(tu);
    if (experiment_cmd->parsed()) return cmd_experiment(ex);
  } catch (const pchoice::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const pchoice::DataFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
