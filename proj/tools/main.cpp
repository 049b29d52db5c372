// airfl: batch experiment runner for the multi-task over-the-air federated
// learning simulator. Subcommands bind a system config file to one experiment
// kind and emit reproducible CSV tables plus a run manifest.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airfl/config.hpp"
#include "airfl/errors.hpp"
#include "airfl/experiment.hpp"
#include "airfl/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    long long trials = 0;
    bool quick = false;
    int threads = 1;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "System config file (key = value lines)");
    cmd->add_option("--out", args.out_dir, "Output directory")
        ->capture_default_str();
    cmd->add_option("--seed", args.seed, "Master RNG seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--trials", args.trials,
                    "Monte Carlo trials (0 = kind default)");
    cmd->add_flag("--quick", args.quick, "Scale trial counts down 10x");
    cmd->add_option("--threads", args.threads, "Worker threads")
        ->capture_default_str();
}

airfl::ExperimentPlan make_plan(airfl::ExperimentPlan::Kind kind,
                                const CommonArgs& args) {
    airfl::ExperimentPlan plan;
    plan.kind = kind;
    if (!args.config_path.empty()) {
        plan.base = airfl::load_config(args.config_path);
    } else {
        plan.base.n_tasks = 2;
        plan.base.devices_per_cluster = 10;
        plan.base.n_shifters = 256;
        plan.base.model_dim = 32;
    }
    if (args.seed_set) plan.base.rng_seed = args.seed;
    plan.out_dir = args.out_dir;
    plan.trials = args.trials;
    plan.quick = args.quick;
    plan.threads = args.threads;
    return plan;
}

int execute(const airfl::ExperimentPlan& plan) {
    const airfl::RunResult result = airfl::run_experiment(plan);
    for (const auto& path : result.outputs) std::printf("wrote %s\n", path.c_str());
    if (result.exit_code == 3)
        std::printf("one or more built-in checks FAILED (see stats.csv)\n");
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-task over-the-air federated learning simulator"};
    app.set_version_flag("--version", airfl::kVersion);
    app.require_subcommand(1);

    CommonArgs lemma_args, sweep_args, task_args, train_args, check_args;
    std::vector<int> nr_grid = {64, 128, 256, 512, 1024};
    std::vector<int> task_grid = {2, 4, 5, 10};
    std::vector<int> quant_bits = {1, 3};
    bool no_ro = false;
    int rounds = 120;
    int n_seeds = 1;
    airfl::SyntheticTaskSpec task_template;

    auto* lemma = app.add_subcommand(
        "lemma-check", "Effective-channel moment checks for the configured system");
    add_common_flags(lemma, lemma_args);
    lemma->add_option("--bits", quant_bits, "Quantized modes to check")
        ->capture_default_str();

    auto* sweep = app.add_subcommand(
        "interference-sweep",
        "Element-wise interference power versus N_r with log-log slope fit");
    add_common_flags(sweep, sweep_args);
    sweep->add_option("--grid", nr_grid, "N_r grid values")->capture_default_str();
    sweep->add_option("--bits", quant_bits, "Quantized modes to include")
        ->capture_default_str();
    sweep->add_flag("--no-ro", no_ro, "Skip the fully-digital RO baseline");

    auto* tasks = app.add_subcommand(
        "task-sweep", "Interference power versus the number of tasks N");
    add_common_flags(tasks, task_args);
    tasks->add_option("--tasks", task_grid, "N values (total devices fixed)")
        ->capture_default_str();
    tasks->add_option("--bits", quant_bits, "Quantized modes to include")
        ->capture_default_str();
    tasks->add_flag("--no-ro", no_ro, "Skip the fully-digital RO baseline");

    auto* train = app.add_subcommand(
        "fl-train", "FedAvg on synthetic tasks, over-the-air versus ideal");
    add_common_flags(train, train_args);
    train->add_option("--rounds", rounds, "Communication rounds")
        ->capture_default_str();
    train->add_option("--seeds", n_seeds, "Replicates with seeds seed, seed+1, ...")
        ->capture_default_str();
    train->add_option("--classes", task_template.n_classes, "Classes per task")
        ->capture_default_str();
    train->add_option("--features", task_template.n_features, "Feature dimension")
        ->capture_default_str();
    train->add_option("--separation", task_template.separation,
                      "Class-mean separation (noise std = 1)")
        ->capture_default_str();
    train->add_option("--samples", task_template.samples_per_device,
                      "Training samples per device")
        ->capture_default_str();
    train->add_option("--model", task_template.model, "logistic or mlp")
        ->capture_default_str();
    train->add_option("--hidden", task_template.hidden_units,
                      "Hidden units (mlp)")
        ->capture_default_str();
    train->add_option("--lr", task_template.learning_rate, "Learning rate")
        ->capture_default_str();
    train->add_option("--local-iters", task_template.local_iterations,
                      "Local SGD steps per round (E)")
        ->capture_default_str();
    train->add_option("--batch", task_template.batch_size,
                      "Mini-batch size (0 = full batch)")
        ->capture_default_str();
    train->add_option("--test-fraction", task_template.test_fraction,
                      "Held-out share of all generated data")
        ->capture_default_str();

    auto* check = app.add_subcommand(
        "check", "Run the built-in statistical-law verification suite");
    add_common_flags(check, check_args);

    CLI11_PARSE(app, argc, argv);

    try {
        airfl::ExperimentPlan plan;
        if (lemma->parsed()) {
            plan = make_plan(airfl::ExperimentPlan::Kind::LemmaCheck, lemma_args);
            plan.quant_bits = quant_bits;
        } else if (sweep->parsed()) {
            plan = make_plan(airfl::ExperimentPlan::Kind::InterferenceSweep,
                             sweep_args);
            plan.nr_grid = nr_grid;
            plan.quant_bits = quant_bits;
            plan.include_ro = !no_ro;
        } else if (tasks->parsed()) {
            plan = make_plan(airfl::ExperimentPlan::Kind::TaskSweep, task_args);
            plan.task_grid = task_grid;
            plan.quant_bits = quant_bits;
            plan.include_ro = !no_ro;
        } else if (train->parsed()) {
            plan = make_plan(airfl::ExperimentPlan::Kind::FlTrain, train_args);
            plan.rounds = rounds;
            plan.n_seeds = n_seeds;
            plan.task_template = task_template;
        } else {
            plan = make_plan(airfl::ExperimentPlan::Kind::Check, check_args);
        }
        return execute(plan);
    } catch (const airfl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
