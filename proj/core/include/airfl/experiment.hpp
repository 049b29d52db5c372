#ifndef AIRFL_EXPERIMENT_HPP
#define AIRFL_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "airfl/config.hpp"
#include "airfl/fedlearn.hpp"

namespace airfl {

/// A batch experiment bound to an output directory. Every run emits the
/// kind's CSV tables plus manifest.json; identical plan + seed produce
/// byte-identical CSVs.
struct ExperimentPlan {
    enum class Kind { LemmaCheck, InterferenceSweep, TaskSweep, FlTrain, Check };

    Kind kind = Kind::Check;
    SystemConfig base;
    std::string out_dir = "out";
    bool quick = false;   ///< scales trial counts down 10x (smoke runs)
    int threads = 1;
    long long trials = 0; ///< 0 selects the kind's default budget

    std::vector<int> nr_grid = {64, 128, 256, 512, 1024};  ///< interference-sweep
    std::vector<int> task_grid = {2, 4, 5, 10};            ///< task-sweep
    std::vector<int> quant_bits = {1, 3};  ///< quantized modes next to continuous
    bool include_ro = true;

    int rounds = 120;  ///< fl-train
    int n_seeds = 1;   ///< fl-train replicate count (seeds seed, seed+1, ...)
    SyntheticTaskSpec task_template;  ///< fl-train synthetic task shape

    void validate() const;
    static Kind parse_kind(const std::string& name);
    static std::string kind_name(Kind kind);
};

/// One row of the built-in verification suite (stats.csv schema).
struct CheckRow {
    std::string check;   ///< e.g. "lemma1_own_mean"
    std::string detail;  ///< e.g. "L=4 M=16 b=3"
    double predicted = 0.0;
    double estimated = 0.0;
    double stderr_est = 0.0;  ///< 0 when the check is deterministic
    double tolerance = 0.0;   ///< absolute tolerance on |estimated - predicted|
    bool pass = false;
};

/// Runs the built-in statistical-law suite: effective-channel moment checks
/// (continuous and quantized), discrete-vs-continuous interference ratios,
/// the interference-power closed form on random small configurations, the
/// error-decomposition identity, and model gradient checks.
std::vector<CheckRow> run_builtin_checks(std::uint64_t seed, bool quick,
                                         int threads);

/// One fl-train replicate: ideal and over-the-air trainings from the same
/// seed (same data, same initialization, same local batches).
struct FlRun {
    std::uint64_t seed = 0;
    TrainingResult ideal;
    TrainingResult aircomp;
};

/// Runs the fl-train replicates described by the plan (seeds base.rng_seed,
/// base.rng_seed + 1, ...).
std::vector<FlRun> run_fl_trainings(const ExperimentPlan& plan);

struct RunResult {
    int exit_code = 0;  ///< 0 ok, 3 when a built-in check failed
    std::vector<std::string> outputs;
};

/// Executes the plan and writes its artifacts under plan.out_dir. Partial
/// outputs are removed if the run throws.
RunResult run_experiment(const ExperimentPlan& plan);

}  // namespace airfl

#endif  // AIRFL_EXPERIMENT_HPP
