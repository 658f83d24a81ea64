#pragma once

#include "amkt/analytics.hpp"
#include "amkt/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace amkt {

struct RunResult {
    std::vector<StepRecord> records;
    RunStatistics stats;
    StepDiagnostics diagnostics;
    std::vector<Agent> final_agents;
    double final_price = 0.0;
};

/// Runs params.n_steps steps and computes statistics on the records after
/// params.burn_in.
[[nodiscard]] RunResult run_single(const ModelParams& params, NewsSource news, const StatsConfig& stats = {});
/// Same, with the default gaussian news stream of params.seed.
[[nodiscard]] RunResult run_single(const ModelParams& params, const StatsConfig& stats = {});

[[nodiscard]] NewsSource default_news(const ModelParams& params);
[[nodiscard]] NewsSource scripted_news(const ModelParams& params, const std::vector<ScriptedNews>& entries);

// ---------------------------------------------------------------------------
// Ensembles and sweeps

enum class SweepParameter { c1_max, c2_max, alpha };

[[nodiscard]] std::string to_string(SweepParameter p);
[[nodiscard]] SweepParameter sweep_parameter_from_string(const std::string& s);
void apply(ModelParams& params, SweepParameter p, double value);

struct SweepAxis {
    SweepParameter parameter = SweepParameter::c1_max;
    std::vector<double> values;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

/// Realization r of every grid point uses seed seed_base + r, so the same
/// random streams are shared along the axes and ensembles can be extended.
struct SweepSpec {
    ModelParams base;
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    std::int64_t n_realizations = 20;
    std::uint64_t seed_base = 1;

    [[nodiscard]] std::size_t grid_size() const;
    /// Parameters of grid point `grid_index` (axis1-major) for realization `r`.
    [[nodiscard]] ModelParams point_params(std::size_t grid_index, std::int64_t r) const;
    [[nodiscard]] std::pair<double, std::optional<double>> point_values(std::size_t grid_index) const;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

void validate(const SweepSpec& spec);

struct RealizationStats {
    double max_mean_k = 0.0;
    double max_drawdown = 0.0;
    double max_drawup = 0.0;

    friend bool operator==(const RealizationStats&, const RealizationStats&) = default;
};

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for fewer than two values

    friend bool operator==(const Moments&, const Moments&) = default;
};

struct SweepPoint {
    double axis1_value = 0.0;
    std::optional<double> axis2_value;
    std::int64_t n_requested = 0;
    std::int64_t n_completed = 0;
    bool complete = false;
    Moments max_mean_k;
    Moments max_drawdown;
    Moments max_drawup;

    friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
    SweepParameter axis1 = SweepParameter::c1_max;
    std::optional<SweepParameter> axis2;
    std::vector<SweepPoint> points;  // axis1-major grid order
    std::vector<std::string> failures;

    friend bool operator==(const SweepResult& a, const SweepResult& b) {
        return a.axis1 == b.axis1 && a.axis2 == b.axis2 && a.points == b.points;
    }
};

using RealizationRunner = std::function<RealizationStats(const ModelParams&)>;

/// Default per-realization job: gaussian news, statistics after burn-in.
[[nodiscard]] RealizationStats run_realization(const ModelParams& params);

/// Worker count from AMKT_WORKERS, else the hardware concurrency.
[[nodiscard]] std::size_t default_worker_count();

struct EnsembleOptions {
    std::size_t workers = 0;  // 0 = default_worker_count()
    /// Append-only per-realization log. Realizations already present are
    /// loaded instead of recomputed.
    std::optional<std::filesystem::path> journal;
    RealizationRunner runner;                  // empty = run_realization
    std::optional<std::uint64_t> shuffle_jobs;  // permute execution order
    int max_attempts = 2;
};

[[nodiscard]] SweepResult run_ensemble(const SweepSpec& spec, const EnsembleOptions& options = {});

/// Mean and sample standard deviation, summed in the given order.
[[nodiscard]] Moments moments(std::span<const double> values);

/// One row of a sweep journal.
struct JournalRow {
    std::size_t grid_index = 0;
    std::int64_t realization = 0;
    std::uint64_t seed = 0;
    double axis1_value = 0.0;
    std::optional<double> axis2_value;
    RealizationStats stats;
};

[[nodiscard]] std::vector<JournalRow> read_journal(const std::filesystem::path& path);

/// Folds journal rows into a SweepResult for `spec`. Rows are keyed by
/// (grid_index, realization); duplicates keep the first occurrence.
[[nodiscard]] SweepResult aggregate(const SweepSpec& spec, std::span<const JournalRow> rows,
                                    std::vector<std::string> failures = {});

// ---------------------------------------------------------------------------
// Regime transition

struct TransitionEstimate {
    bool found = false;
    double c1_star = 0.0;
    double width = 0.0;
    double low_plateau = 0.0;
    double high_plateau = 0.0;
    std::string diagnostic;
};

/// Midpoint crossing of an order-parameter curve sampled at increasing C1.
/// Plateaus are the means of the two lowest-C1 and two highest-C1 points;
/// width is the distance between the 25% and 75% crossings. Crossings are
/// the first upward crossing, linearly interpolated. Needs >= 6 points.
[[nodiscard]] TransitionEstimate detect_transition(std::span<const std::pair<double, double>> curve);

/// Curve of mean max_mean_k against axis1 at one axis2 value (or the only
/// slice when there is no axis2).
[[nodiscard]] std::vector<std::pair<double, double>> transition_curve(const SweepResult& result,
                                                                      std::optional<double> axis2_value = {});

// ---------------------------------------------------------------------------
// Scripted news streaks

struct StreakOptions {
    std::int64_t peak_slack = 5;  // peak search extends this far past the streak
    std::int64_t fit_window = 60; // steps after the peak used for the decay fit
};

struct StreakDiagnostics {
    std::int64_t streak_start = 0;
    std::int64_t streak_end = 0;  // last scripted step
    bool responded = false;
    double baseline_abs_u = 0.0;  // |u(start)|, the last value not driven by the streak
    std::int64_t peak_step = 0;
    double peak_u = 0.0;
    std::optional<double> efold_time;  // from a log-linear fit of |u| after the peak
    double fit_r2 = 0.0;
    std::string diagnostic;
};

struct StreakResult {
    std::vector<StepRecord> records;
    StreakDiagnostics diagnostics;
};

[[nodiscard]] StreakDiagnostics analyze_streak(std::span<const StepRecord> records, const ScriptedNews& streak,
                                               const StreakOptions& options = {});

/// Runs params with `streak` injected into the gaussian news stream of
/// params.seed and analyses the response of u.
[[nodiscard]] StreakResult scenario_streak(const ModelParams& params, const ScriptedNews& streak,
                                           const StreakOptions& options = {});

/// Mean response of u over several seeds. Each realization is sign-aligned by
/// u(end+1) before averaging, so the shared decay survives while the news
/// driven noise after the streak averages out.
struct StreakEnsemble {
    std::vector<std::int64_t> t;
    std::vector<double> mean_aligned_u;
    StreakDiagnostics diagnostics;  // analysis of the mean curve
};

[[nodiscard]] StreakEnsemble streak_ensemble(const ModelParams& params, const ScriptedNews& streak,
                                             std::span<const std::uint64_t> seeds,
                                             const StreakOptions& options = {});

struct PriceExcursion {
    double max_abs = 0.0;     // max |log p(t) - log p(start-1)| over [start, end+horizon]
    double at_horizon = 0.0;  // |log p(end+horizon) - log p(start-1)|
};

/// Throws AnalyticsError when the records do not cover [start-1, end+horizon].
[[nodiscard]] PriceExcursion price_excursion(std::span<const StepRecord> records, const ScriptedNews& streak,
                                             std::int64_t horizon);

}  // namespace amkt
