#pragma once

#include "amkt/analytics.hpp"
#include "amkt/experiments.hpp"
#include "amkt/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace amkt {

enum class NewsKind { gaussian, scripted };

struct NewsConfig {
    NewsKind kind = NewsKind::gaussian;
    std::vector<ScriptedNews> entries;  // scripted only

    friend bool operator==(const NewsConfig&, const NewsConfig&) = default;
};

struct OutputToggles {
    bool timeseries = true;
    bool stats = true;
    bool agents = true;  // final per-agent portfolio and wealth

    friend bool operator==(const OutputToggles&, const OutputToggles&) = default;
};

/// Optional sweep block; the base parameters are the config's model block.
struct SweepConfig {
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    std::int64_t n_realizations = 20;
    std::uint64_t seed_base = 1;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct RunConfig {
    ModelParams model;
    NewsConfig news;
    std::string output_dir = "out";
    OutputToggles emit;
    StatsConfig stats;
    StreakOptions streak;
    std::optional<SweepConfig> sweep;

    [[nodiscard]] SweepSpec sweep_spec() const;
    [[nodiscard]] NewsSource make_news() const;

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.model == b.model && a.news == b.news && a.output_dir == b.output_dir && a.emit == b.emit &&
               a.stats == b.stats && a.streak.peak_slack == b.streak.peak_slack && a.streak.fit_window == b.streak.fit_window &&
               a.sweep == b.sweep;
    }
};

/// Strict JSON decoding: unknown keys and wrong types raise ConfigError with
/// the dotted key path; omitted keys take their defaults. The model block is
/// validated after decoding.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& j);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);
[[nodiscard]] std::string serialize_config(const RunConfig& config);

inline constexpr const char* timeseries_header =
    "t,price,log_price,return,news,u,mean_k,activity,total_cash,total_stocks";
inline constexpr const char* stats_header = "statistic,index,value";
inline constexpr const char* sweep_header =
    "axis1_name,axis1_value,axis2_name,axis2_value,n_requested,n_completed,complete,"
    "mean_max_mean_k,std_max_mean_k,mean_max_drawdown,std_max_drawdown,mean_max_drawup,std_max_drawup";

[[nodiscard]] std::string format_timeseries(const std::vector<StepRecord>& records);
[[nodiscard]] std::string format_stats(const RunStatistics& stats);
[[nodiscard]] std::string format_sweep(const SweepResult& result);

void emit_timeseries(const std::vector<StepRecord>& records, const std::filesystem::path& path);
void emit_stats(const RunStatistics& stats, const std::filesystem::path& path);
void emit_sweep(const SweepResult& result, const std::filesystem::path& path);
void emit_agents(const std::vector<Agent>& agents, double price, const std::filesystem::path& path);
void emit_streak(const StreakDiagnostics& diag, const std::filesystem::path& path);
void emit_transitions(const SweepResult& result, const std::filesystem::path& path);

[[nodiscard]] std::vector<StepRecord> read_timeseries(const std::filesystem::path& path);
[[nodiscard]] SweepResult read_sweep(const std::filesystem::path& path);

}  // namespace amkt
