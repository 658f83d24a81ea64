// Command-line front end: simulate, sweep, scenario, analyze.

#include "amkt/csv.hpp"
#include "amkt/experiments.hpp"
#include "amkt/io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace amkt;

namespace {

constexpr int exit_config_error = 2;
constexpr int exit_runtime_error = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::int64_t> steps;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration (omitted: baseline defaults)");
    cmd->add_option("--seed", o.seed, "root seed, overrides the config");
    cmd->add_option("--out", o.out, "output directory, overrides the config");
    cmd->add_option("--steps", o.steps, "number of steps, overrides the config");
}

RunConfig resolve(const CommonOptions& o) {
    RunConfig cfg = o.config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(o.config_path);
    if (o.seed) cfg.model.seed = *o.seed;
    if (o.steps) cfg.model.n_steps = *o.steps;
    if (o.out) cfg.output_dir = *o.out;
    validate(cfg.model);
    if (cfg.sweep) validate(cfg.sweep_spec());
    return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
    write_file_atomic(dir / "config.json", serialize_config(cfg));
    return dir;
}

int cmd_simulate(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto dir = prepare_output(cfg);
    const auto result = run_single(cfg.model, cfg.make_news(), cfg.stats);
    if (cfg.emit.timeseries) emit_timeseries(result.records, dir / "timeseries.csv");
    if (cfg.emit.stats) emit_stats(result.stats, dir / "stats.csv");
    if (cfg.emit.agents) emit_agents(result.final_agents, result.final_price, dir / "agents.csv");
    std::cout << "simulated " << result.records.size() << " steps; max <k> " << result.stats.max_mean_k
              << ", max draw-down " << result.stats.max_drawdown << ", max draw-up " << result.stats.max_drawup
              << ", solvency caps " << result.diagnostics.solvency_caps << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& o, std::optional<std::size_t> workers) {
    const auto cfg = resolve(o);
    if (!cfg.sweep) throw ConfigError("sweep", "is required for the sweep command");
    const auto dir = prepare_output(cfg);
    EnsembleOptions opts;
    opts.journal = dir / "sweep_journal.csv";
    if (workers) opts.workers = *workers;
    const auto result = run_ensemble(cfg.sweep_spec(), opts);
    emit_sweep(result, dir / "sweep.csv");
    if (result.axis1 == SweepParameter::c1_max) emit_transitions(result, dir / "transition.csv");
    for (const auto& f : result.failures) std::cerr << "failed: " << f << "\n";
    std::cout << "sweep finished: " << result.points.size() << " grid points\n";
    return result.failures.empty() ? 0 : exit_runtime_error;
}

int cmd_scenario(const CommonOptions& o) {
    const auto cfg = resolve(o);
    if (cfg.news.kind != NewsKind::scripted || cfg.news.entries.empty()) {
        throw ConfigError("news", "scenario needs scripted news entries");
    }
    const auto dir = prepare_output(cfg);
    Simulation sim(cfg.model, cfg.make_news());
    const auto records = sim.run(cfg.model.n_steps);
    emit_timeseries(records, dir / "timeseries.csv");
    // the first entry is the streak under study; later entries only shape the stream
    const auto diag = analyze_streak(records, cfg.news.entries.front(), cfg.streak);
    emit_streak(diag, dir / "streak.csv");
    std::cout << "streak " << diag.streak_start << ".." << diag.streak_end << ": " << diag.diagnostic;
    if (diag.efold_time) std::cout << ", peak at " << diag.peak_step << ", e-folding time " << *diag.efold_time;
    std::cout << "\n";
    return 0;
}

int cmd_analyze(const CommonOptions& o, const std::string& input) {
    const auto cfg = resolve(o);
    const auto records = read_timeseries(input);
    const auto stats = compute_statistics(after_burn_in(records, cfg.model.burn_in), cfg.stats);
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
    emit_stats(stats, dir / "stats.csv");
    std::cout << "analyzed " << stats.n_records << " records\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive-agent market simulator"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "one run: timeseries.csv, stats.csv, agents.csv");
    add_common(simulate, sim_opts);

    CommonOptions sweep_opts;
    std::optional<std::size_t> workers;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep from the config's sweep block: sweep.csv");
    add_common(sweep, sweep_opts);
    sweep->add_option("--workers", workers, "worker threads (default: AMKT_WORKERS or hardware concurrency)");

    CommonOptions scen_opts;
    auto* scenario = app.add_subcommand("scenario", "scripted-news run: timeseries.csv, streak.csv");
    add_common(scenario, scen_opts);

    CommonOptions an_opts;
    std::string input;
    auto* analyze = app.add_subcommand("analyze", "recompute stats.csv from an existing timeseries.csv");
    add_common(analyze, an_opts);
    analyze->add_option("--input", input, "timeseries CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config_error;
    }

    try {
        if (*simulate) return cmd_simulate(sim_opts);
        if (*sweep) return cmd_sweep(sweep_opts, workers);
        if (*scenario) return cmd_scenario(scen_opts);
        if (*analyze) return cmd_analyze(an_opts, input);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    return 0;
}
