#include "airfl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "airfl/aircomp.hpp"
#include "airfl/analysis.hpp"
#include "airfl/errors.hpp"
#include "airfl/stats.hpp"
#include "airfl/version.hpp"

namespace airfl {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Plan plumbing.
// ---------------------------------------------------------------------------

ExperimentPlan::Kind ExperimentPlan::parse_kind(const std::string& name) {
    if (name == "lemma-check") return Kind::LemmaCheck;
    if (name == "interference-sweep") return Kind::InterferenceSweep;
    if (name == "task-sweep") return Kind::TaskSweep;
    if (name == "fl-train") return Kind::FlTrain;
    if (name == "check") return Kind::Check;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string ExperimentPlan::kind_name(Kind kind) {
    switch (kind) {
        case Kind::LemmaCheck: return "lemma-check";
        case Kind::InterferenceSweep: return "interference-sweep";
        case Kind::TaskSweep: return "task-sweep";
        case Kind::FlTrain: return "fl-train";
        case Kind::Check: return "check";
    }
    return "unknown";
}

void ExperimentPlan::validate() const {
    base.validate();
    if (out_dir.empty()) throw ConfigError("output directory must be set");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (trials < 0) throw ConfigError("trials must be >= 0");
    for (const int b : quant_bits)
        if (b < 1) throw ConfigError("quantized modes need bits >= 1");
    if (kind == Kind::InterferenceSweep) {
        if (nr_grid.size() < 4)
            throw ConfigError("interference sweep needs >= 4 grid points");
        for (std::size_t i = 0; i + 1 < nr_grid.size(); ++i)
            if (nr_grid[i] >= nr_grid[i + 1])
                throw ConfigError("N_r grid must be strictly increasing");
        for (const int nr : nr_grid)
            if (nr < 1 || nr % base.n_tasks != 0)
                throw ConfigError("every N_r grid value must be divisible by n_tasks");
        if (base.n_tasks < 2)
            throw ConfigError("interference sweep needs n_tasks >= 2");
    }
    if (kind == Kind::TaskSweep) {
        if (task_grid.empty()) throw ConfigError("task sweep needs grid values");
        const int total = base.total_devices();
        for (std::size_t i = 0; i + 1 < task_grid.size(); ++i)
            if (task_grid[i] >= task_grid[i + 1])
                throw ConfigError("task grid must be strictly increasing");
        for (const int n : task_grid) {
            if (n < 2) throw ConfigError("task sweep values must be >= 2");
            if (total % n != 0)
                throw ConfigError("total device count must be divisible by every N");
            if (base.n_shifters % n != 0)
                throw ConfigError("n_shifters must be divisible by every N");
        }
    }
    if (kind == Kind::FlTrain) {
        if (rounds < 1) throw ConfigError("fl-train needs rounds >= 1");
        if (n_seeds < 1) throw ConfigError("fl-train needs n_seeds >= 1");
    }
}

// ---------------------------------------------------------------------------
// CSV helpers.
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path.string());
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

long long scaled(long long trials, bool quick) {
    return quick ? std::max<long long>(trials / 10, 100) : trials;
}

// ---------------------------------------------------------------------------
// Built-in checks.
// ---------------------------------------------------------------------------

void append_moment_rows(std::vector<CheckRow>& rows, const SystemConfig& cfg,
                        const EffectiveChannelStats& s) {
    char detail[96];
    std::snprintf(detail, sizeof(detail), "N=%d L=%d M=%d b=%d", cfg.n_tasks,
                  cfg.devices_per_cluster, cfg.subarray_size(), s.bits);
    const std::string lemma = s.bits == 0 ? "lemma1" : "lemma2";

    CheckRow mean_row;
    mean_row.check = lemma + "_own_mean";
    mean_row.detail = detail;
    mean_row.predicted = s.predicted_mean;
    mean_row.estimated = std::abs(s.own_mean);
    mean_row.stderr_est = s.own_mean_stderr;
    mean_row.tolerance = 0.01 * s.predicted_mean;
    mean_row.pass = std::abs(mean_row.estimated - mean_row.predicted) <=
                    mean_row.tolerance;
    rows.push_back(mean_row);

    CheckRow var_row;
    var_row.check = lemma + "_own_variance";
    var_row.detail = detail;
    var_row.predicted = s.predicted_variance;
    var_row.estimated = s.own_variance;
    var_row.tolerance = 0.02 * s.predicted_variance;
    var_row.pass =
        std::abs(var_row.estimated - var_row.predicted) <= var_row.tolerance;
    rows.push_back(var_row);

    if (s.off_count > 0) {
        CheckRow off_mean;
        off_mean.check = lemma + "_cross_mean";
        off_mean.detail = detail;
        off_mean.predicted = 0.0;
        off_mean.estimated = std::abs(s.off_mean);
        off_mean.stderr_est = s.off_mean_stderr;
        off_mean.tolerance = 3.0 * s.off_mean_stderr;
        off_mean.pass = off_mean.estimated <= off_mean.tolerance;
        rows.push_back(off_mean);

        CheckRow off_var;
        off_var.check = lemma + "_cross_variance";
        off_var.detail = detail;
        off_var.predicted = 1.0;
        off_var.estimated = s.off_variance;
        off_var.tolerance = 0.02;
        off_var.pass =
            std::abs(off_var.estimated - off_var.predicted) <= off_var.tolerance;
        rows.push_back(off_var);
    }
}

void run_moment_checks(std::vector<CheckRow>& rows, std::uint64_t seed,
                       long long trials, int threads) {
    struct LmCase {
        int devices;
        int subarray;
    };
    const LmCase cases[] = {{1, 1}, {4, 16}, {25, 32}};
    const int bits[] = {0, 1, 2, 3};
    for (const auto& c : cases) {
        SystemConfig cfg;
        cfg.n_tasks = 2;
        cfg.devices_per_cluster = c.devices;
        cfg.n_shifters = 2 * c.subarray;
        cfg.model_dim = 1;
        cfg.rng_seed = derive_key(seed, StreamTag::Misc, 11, c.devices, c.subarray);
        McOptions opts;
        opts.threads = threads;
        const auto stats = estimate_effective_channel_stats(cfg, bits, trials, opts);
        for (const auto& s : stats) append_moment_rows(rows, cfg, s);
    }
}

void run_ratio_checks(std::vector<CheckRow>& rows, std::uint64_t seed,
                      long long trials, int threads) {
    SystemConfig cfg;
    cfg.n_tasks = 2;
    cfg.devices_per_cluster = 4;
    cfg.n_shifters = 32;
    cfg.model_dim = 1;
    cfg.rng_seed = derive_key(seed, StreamTag::Misc, 12);
    const std::vector<SchemeSpec> schemes = {
        SchemeSpec::continuous(), SchemeSpec::quantized(1), SchemeSpec::quantized(2),
        SchemeSpec::quantized(3), SchemeSpec::quantized(4)};
    InterferenceOptions opts;
    opts.threads = threads;
    const auto reports = estimate_interference_power(cfg, schemes, trials, opts);
    for (std::size_t m = 1; m < reports.size(); ++m) {
        const int b = schemes[m].bits;
        CheckRow row;
        row.check = "lemma3_power_ratio";
        row.detail = "b=" + std::to_string(b);
        row.predicted = predicted_discrete_power_ratio(b);
        row.estimated = reports[m].element_wise / reports[0].element_wise;
        const double rel_a =
            reports[m].element_wise_stderr / reports[m].element_wise;
        const double rel_b =
            reports[0].element_wise_stderr / reports[0].element_wise;
        row.stderr_est = row.estimated * std::sqrt(rel_a * rel_a + rel_b * rel_b);
        row.tolerance = 0.02 * row.predicted;
        row.pass = std::abs(row.estimated - row.predicted) <= row.tolerance;
        rows.push_back(row);
    }
}

void run_interference_oracle_checks(std::vector<CheckRow>& rows, std::uint64_t seed,
                                    long long trials, int threads) {
    RngStream pick = substream(seed, StreamTag::Misc, 13);
    for (int rep = 0; rep < 5; ++rep) {
        SystemConfig cfg;
        cfg.n_tasks = 2 + static_cast<int>(pick.next_u64() % 3);       // 2..4
        cfg.devices_per_cluster = 1 + static_cast<int>(pick.next_u64() % 5);
        const int subarray = 1 << (pick.next_u64() % 4);               // 1..8
        cfg.n_shifters = cfg.n_tasks * subarray;
        cfg.model_dim = 2 + static_cast<int>(pick.next_u64() % 15);    // 2..16
        cfg.power_budget = 0.5 + pick.uniform() * 2.0;
        cfg.rng_seed = derive_key(seed, StreamTag::Misc, 14, rep);

        InterferenceOptions opts;
        opts.threads = threads;
        opts.unit_signals = true;
        opts.stats.resize(static_cast<std::size_t>(cfg.total_devices()));
        for (int task = 0; task < cfg.n_tasks; ++task) {
            std::vector<std::size_t> sizes(
                static_cast<std::size_t>(cfg.devices_per_cluster));
            for (auto& s : sizes) s = 50 + pick.next_u64() % 150;
            const auto alphas = alphas_from_sizes(sizes);
            for (int dev = 0; dev < cfg.devices_per_cluster; ++dev)
                opts.stats[static_cast<std::size_t>(task) * cfg.devices_per_cluster +
                           dev] = {alphas[dev], 0.5 + pick.uniform()};
        }

        const auto report = estimate_interference_power(
            cfg, SchemeSpec::continuous(), trials, opts);
        char detail[96];
        std::snprintf(detail, sizeof(detail), "N=%d L=%d M=%d d=%d", cfg.n_tasks,
                      cfg.devices_per_cluster, subarray, cfg.model_dim);
        CheckRow row;
        row.check = "interference_power_oracle";
        row.detail = detail;
        row.predicted = report.element_wise_analytic;
        row.estimated = report.element_wise;
        row.stderr_est = report.element_wise_stderr;
        row.tolerance = 0.02 * row.predicted;
        row.pass = std::abs(row.estimated - row.predicted) <= row.tolerance;
        rows.push_back(row);
    }
}

void run_decomposition_checks(std::vector<CheckRow>& rows, std::uint64_t seed,
                              long long n_rounds) {
    SystemConfig cfg;
    cfg.n_tasks = 2;
    cfg.devices_per_cluster = 2;
    cfg.n_shifters = 8;
    cfg.model_dim = 8;
    cfg.noise_variance = 0.5;
    cfg.power_budget = 2.0;
    cfg.rng_seed = derive_key(seed, StreamTag::Misc, 15);

    RngStream gen = substream(seed, StreamTag::Misc, 16);
    double worst = 0.0;
    for (long long round = 0; round < n_rounds; ++round) {
        std::vector<LocalUpdate> updates;
        updates.reserve(static_cast<std::size_t>(cfg.total_devices()));
        for (int task = 0; task < cfg.n_tasks; ++task) {
            std::vector<std::size_t> sizes(
                static_cast<std::size_t>(cfg.devices_per_cluster));
            for (auto& s : sizes) s = 50 + gen.next_u64() % 100;
            const auto alphas = alphas_from_sizes(sizes);
            for (int dev = 0; dev < cfg.devices_per_cluster; ++dev) {
                std::vector<double> g(static_cast<std::size_t>(cfg.model_dim));
                if (round % 10 == 3 && dev == 0) {
                    std::fill(g.begin(), g.end(), 2.5);  // degenerate path
                } else {
                    const double scale = 0.5 + 2.5 * gen.uniform();
                    const double shift = gen.normal();
                    for (auto& x : g) x = shift + scale * gen.normal();
                }
                updates.push_back(normalize(std::move(g), alphas[dev]));
            }
        }
        const auto stats = collect_stats(updates);
        const PowerAllocation alloc =
            compute_scaling_factor(stats, cfg, cfg.quantization_bits);
        const ChannelRealization h =
            sample_channels(cfg, static_cast<std::uint64_t>(round));
        const AnalogBeamformer bf = build_analog_continuous(h, cfg);
        const NoiseDraw noise = sample_noise(cfg, static_cast<std::uint64_t>(round));
        const DigitalCombiner comb{alloc.zeta, cfg.n_tasks};
        const RoundTransmission tx =
            transmit_round(updates, h, bf, comb, noise, alloc.powers);
        for (int task = 0; task < cfg.n_tasks; ++task) {
            const auto outcome = estimate_global_update(
                tx, task,
                std::span<const LocalUpdate>(updates).subspan(
                    static_cast<std::size_t>(task) * cfg.devices_per_cluster,
                    static_cast<std::size_t>(cfg.devices_per_cluster)));
            for (int c = 0; c < cfg.model_dim; ++c) {
                const double reconstructed = outcome.term_weight_distortion[c] +
                                             outcome.term_interference[c] +
                                             outcome.term_noise[c];
                worst = std::max(worst, std::abs(outcome.error[c] - reconstructed));
            }
        }
    }

    CheckRow row;
    row.check = "error_decomposition_identity";
    row.detail = "N=2 L=2 M=4 d=8 rounds=" + std::to_string(n_rounds);
    row.predicted = 0.0;
    row.estimated = worst;
    row.tolerance = 1e-10;
    row.pass = worst < row.tolerance;
    rows.push_back(row);
}

void run_gradient_checks(std::vector<CheckRow>& rows, std::uint64_t seed) {
    Dataset data;
    data.n_features = 7;
    data.n_classes = 3;
    RngStream gen = substream(seed, StreamTag::Misc, 17);
    const std::size_t n_samples = 40;
    data.features.resize(n_samples * data.n_features);
    data.labels.resize(n_samples);
    for (auto& x : data.features) x = gen.normal();
    for (auto& y : data.labels) y = static_cast<int>(gen.next_u64() % 3);

    const LogisticRegression logistic(data.n_features, data.n_classes);
    const MlpClassifier mlp(data.n_features, 5, data.n_classes);
    const struct {
        const Model* model;
        const char* name;
    } models[] = {{&logistic, "logistic"}, {&mlp, "mlp"}};
    for (const auto& m : models) {
        CheckRow row;
        row.check = "gradient_vs_finite_difference";
        row.detail = m.name;
        row.predicted = 0.0;
        row.estimated = max_rel_gradient_error(*m.model, data, 20,
                                               derive_key(seed, StreamTag::Misc, 18));
        row.tolerance = 1e-5;
        row.pass = row.estimated < row.tolerance;
        rows.push_back(row);
    }
}

}  // namespace

std::vector<CheckRow> run_builtin_checks(std::uint64_t seed, bool quick,
                                         int threads) {
    std::vector<CheckRow> rows;
    run_moment_checks(rows, seed, scaled(100000, quick), threads);
    run_ratio_checks(rows, seed, scaled(20000, quick), threads);
    run_interference_oracle_checks(rows, seed, scaled(100000, quick), threads);
    run_decomposition_checks(rows, seed, quick ? 20 : 100);
    run_gradient_checks(rows, seed);
    return rows;
}

// ---------------------------------------------------------------------------
// Experiment runners.
// ---------------------------------------------------------------------------

namespace {

std::vector<SchemeSpec> plan_schemes(const ExperimentPlan& plan) {
    std::vector<SchemeSpec> schemes = {SchemeSpec::continuous()};
    for (const int b : plan.quant_bits) schemes.push_back(SchemeSpec::quantized(b));
    if (plan.include_ro) schemes.push_back(SchemeSpec::ro());
    return schemes;
}

std::string scheme_family(const SchemeSpec& s) {
    if (s.family == SchemeSpec::Family::Ro) return "ro";
    return s.bits == 0 ? "continuous" : "quantized";
}

void write_stats_csv(const fs::path& path, const std::vector<CheckRow>& rows) {
    CsvFile csv(path, "check,detail,predicted,estimated,stderr,tolerance,pass");
    for (const auto& r : rows)
        csv.row({r.check, r.detail, fmt(r.predicted), fmt(r.estimated),
                 fmt(r.stderr_est), fmt(r.tolerance), r.pass ? "1" : "0"});
}

void run_lemma_check(const ExperimentPlan& plan, const fs::path& dir,
                     std::vector<CheckRow>& rows) {
    std::vector<int> bits = {0};
    for (const int b : plan.quant_bits) bits.push_back(b);
    McOptions opts;
    opts.threads = plan.threads;
    const long long trials =
        scaled(plan.trials > 0 ? plan.trials : 100000, plan.quick);
    const auto stats =
        estimate_effective_channel_stats(plan.base, bits, trials, opts);
    for (const auto& s : stats) append_moment_rows(rows, plan.base, s);
    write_stats_csv(dir / "stats.csv", rows);
}

void run_interference_sweep(const ExperimentPlan& plan, const fs::path& dir) {
    const auto schemes = plan_schemes(plan);
    InterferenceOptions opts;
    opts.threads = plan.threads;
    const long long trials =
        scaled(plan.trials > 0 ? plan.trials : 10000, plan.quick);
    const auto fits =
        fit_scaling_law(plan.base, plan.nr_grid, schemes, trials, opts);

    CsvFile fig1(dir / "fig1.csv", "n_r,scheme,bits,element_wise_power,stderr");
    for (const auto& fit : fits)
        for (std::size_t i = 0; i < fit.grid.size(); ++i)
            fig1.row({std::to_string(fit.grid[i]), scheme_family(fit.scheme),
                      std::to_string(fit.scheme.bits), fmt(fit.element_wise[i]),
                      fmt(fit.element_wise_stderr[i])});

    CsvFile slopes(dir / "slopes.csv", "scheme,bits,slope,intercept");
    for (const auto& fit : fits)
        slopes.row({scheme_family(fit.scheme), std::to_string(fit.scheme.bits),
                    fmt(fit.slope), fmt(fit.intercept)});
}

void run_task_sweep(const ExperimentPlan& plan, const fs::path& dir) {
    const auto schemes = plan_schemes(plan);
    const int total_devices = plan.base.total_devices();
    InterferenceOptions opts;
    opts.threads = plan.threads;
    const long long trials =
        scaled(plan.trials > 0 ? plan.trials : 10000, plan.quick);

    CsvFile fig2(dir / "fig2.csv", "n_tasks,scheme,bits,element_wise_power,stderr");
    for (const int n : plan.task_grid) {
        SystemConfig cfg = plan.base;
        cfg.n_tasks = n;
        cfg.devices_per_cluster = total_devices / n;
        const auto reports =
            estimate_interference_power(cfg, schemes, trials, opts);
        for (const auto& r : reports)
            fig2.row({std::to_string(n), scheme_family(r.scheme),
                      std::to_string(r.scheme.bits), fmt(r.element_wise),
                      fmt(r.element_wise_stderr)});
    }
}

void write_trace_rows(CsvFile& csv, const char* mode, std::uint64_t seed,
                      const TrainingResult& result) {
    for (const auto& rec : result.trace)
        csv.row({mode, std::to_string(seed), std::to_string(rec.round),
                 std::to_string(rec.task), fmt(rec.loss), fmt(rec.accuracy),
                 fmt(rec.g_true_norm), fmt(rec.error_norm),
                 fmt(rec.weight_distortion_energy), fmt(rec.interference_energy),
                 fmt(rec.noise_energy), fmt(rec.imag_energy_ratio)});
}

void run_fl_train(const ExperimentPlan& plan, const fs::path& dir,
                  std::vector<std::string>& outputs) {
    const auto runs = run_fl_trainings(plan);

    CsvFile trace(dir / "trace.csv",
                  "mode,seed,round,task,loss,accuracy,g_true_norm,error_norm,"
                  "weight_distortion_energy,interference_energy,noise_energy,"
                  "imag_energy_ratio");
    CsvFile summary(dir / "summary.csv",
                    "mode,seed,task,final_loss,final_accuracy");
    for (const auto& run : runs) {
        write_trace_rows(trace, "ideal", run.seed, run.ideal);
        write_trace_rows(trace, "aircomp", run.seed, run.aircomp);
        for (std::size_t task = 0; task < run.ideal.final_accuracy.size(); ++task) {
            summary.row({"ideal", std::to_string(run.seed), std::to_string(task),
                         fmt(run.ideal.final_loss[task]),
                         fmt(run.ideal.final_accuracy[task])});
            summary.row({"aircomp", std::to_string(run.seed), std::to_string(task),
                         fmt(run.aircomp.final_loss[task]),
                         fmt(run.aircomp.final_accuracy[task])});
        }
    }

    for (std::size_t task = 0; task < runs.front().aircomp.params.size(); ++task) {
        const fs::path ideal_path =
            dir / ("checkpoint_ideal_task" + std::to_string(task) + ".txt");
        const fs::path air_path =
            dir / ("checkpoint_aircomp_task" + std::to_string(task) + ".txt");
        save_checkpoint(ideal_path.string(), runs.front().ideal.params[task],
                        plan.rounds - 1, static_cast<int>(task));
        save_checkpoint(air_path.string(), runs.front().aircomp.params[task],
                        plan.rounds - 1, static_cast<int>(task));
        outputs.push_back(ideal_path.string());
        outputs.push_back(air_path.string());
    }
}

}  // namespace

std::vector<FlRun> run_fl_trainings(const ExperimentPlan& plan) {
    plan.validate();
    std::vector<FlRun> runs;
    runs.reserve(static_cast<std::size_t>(plan.n_seeds));
    for (int rep = 0; rep < plan.n_seeds; ++rep) {
        const std::uint64_t seed = plan.base.rng_seed + static_cast<std::uint64_t>(rep);
        SyntheticTaskSpec tmpl = plan.task_template;
        tmpl.devices = plan.base.devices_per_cluster;
        std::vector<SyntheticTaskSpec> specs(
            static_cast<std::size_t>(plan.base.n_tasks), tmpl);
        const auto tasks = make_synthetic_tasks(specs, seed);

        SystemConfig cfg = plan.base;
        cfg.rng_seed = seed;
        cfg.model_dim = padded_dim(tasks);

        FlRun run;
        run.seed = seed;
        TrainingOptions ideal;
        ideal.mode = ChannelMode::Ideal;
        ideal.rounds = plan.rounds;
        run.ideal = run_training(tasks, cfg, ideal);
        TrainingOptions air;
        air.mode = ChannelMode::AirComp;
        air.rounds = plan.rounds;
        run.aircomp = run_training(tasks, cfg, air);
        runs.push_back(std::move(run));
    }
    return runs;
}

RunResult run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(plan.out_dir);
    fs::create_directories(dir);

    RunResult result;
    auto track = [&](const std::string& name) {
        result.outputs.push_back((dir / name).string());
    };

    std::vector<CheckRow> rows;
    try {
        switch (plan.kind) {
            case ExperimentPlan::Kind::LemmaCheck:
                track("stats.csv");
                run_lemma_check(plan, dir, rows);
                break;
            case ExperimentPlan::Kind::InterferenceSweep:
                track("fig1.csv");
                track("slopes.csv");
                run_interference_sweep(plan, dir);
                break;
            case ExperimentPlan::Kind::TaskSweep:
                track("fig2.csv");
                run_task_sweep(plan, dir);
                break;
            case ExperimentPlan::Kind::FlTrain:
                track("trace.csv");
                track("summary.csv");
                run_fl_train(plan, dir, result.outputs);
                break;
            case ExperimentPlan::Kind::Check:
                track("stats.csv");
                rows = run_builtin_checks(plan.base.rng_seed, plan.quick,
                                          plan.threads);
                write_stats_csv(dir / "stats.csv", rows);
                break;
        }
    } catch (...) {
        for (const auto& path : result.outputs) {
            std::error_code ec;
            fs::remove(path, ec);
        }
        throw;
    }

    for (const auto& row : rows)
        if (!row.pass) result.exit_code = 3;

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    json manifest;
    manifest["version"] = kVersion;
    manifest["kind"] = ExperimentPlan::kind_name(plan.kind);
    manifest["quick"] = plan.quick;
    manifest["threads"] = plan.threads;
    manifest["seed"] = plan.base.rng_seed;
    manifest["config"] = {
        {"n_tasks", plan.base.n_tasks},
        {"devices_per_cluster", plan.base.devices_per_cluster},
        {"n_shifters", plan.base.n_shifters},
        {"quantization_bits", plan.base.quantization_bits},
        {"power_budget", plan.base.power_budget},
        {"noise_variance", plan.base.noise_variance},
        {"model_dim", plan.base.model_dim},
    };
    if (plan.kind == ExperimentPlan::Kind::InterferenceSweep)
        manifest["nr_grid"] = plan.nr_grid;
    if (plan.kind == ExperimentPlan::Kind::TaskSweep)
        manifest["task_grid"] = plan.task_grid;
    if (plan.kind == ExperimentPlan::Kind::InterferenceSweep ||
        plan.kind == ExperimentPlan::Kind::TaskSweep) {
        manifest["quant_bits"] = plan.quant_bits;
        manifest["include_ro"] = plan.include_ro;
        manifest["trials"] =
            scaled(plan.trials > 0 ? plan.trials : 10000, plan.quick);
        manifest["notes"]["ro_normalization"] =
            "RO combiner scaled so its expected desired-signal coefficient "
            "matches the analog scheme: zeta_ro = max(alpha v) / (N_r sqrt(P)).";
    }
    if (plan.kind == ExperimentPlan::Kind::LemmaCheck ||
        plan.kind == ExperimentPlan::Kind::Check)
        manifest["trials"] =
            scaled(plan.trials > 0 ? plan.trials : 100000, plan.quick);
    if (plan.kind == ExperimentPlan::Kind::FlTrain) {
        manifest["rounds"] = plan.rounds;
        manifest["n_seeds"] = plan.n_seeds;
        manifest["task"] = {
            {"n_classes", plan.task_template.n_classes},
            {"n_features", plan.task_template.n_features},
            {"separation", plan.task_template.separation},
            {"samples_per_device", plan.task_template.samples_per_device},
            {"model", plan.task_template.model},
            {"learning_rate", plan.task_template.learning_rate},
            {"local_iterations", plan.task_template.local_iterations},
            {"batch_size", plan.task_template.batch_size},
        };
    }
    manifest["outputs"] = result.outputs;
    manifest["wall_time_ms"] = elapsed.count();

    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw ConfigError("cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
    result.outputs.push_back((dir / "manifest.json").string());
    return result;
}

}  // namespace airfl
