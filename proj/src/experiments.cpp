#include "amkt/experiments.hpp"

#include "amkt/csv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace amkt {

NewsSource default_news(const ModelParams& params) {
    return NewsSource::gaussian(derive_seed(params.seed, Stream::news));
}

NewsSource scripted_news(const ModelParams& params, const std::vector<ScriptedNews>& entries) {
    return NewsSource::scripted(entries, derive_seed(params.seed, Stream::news));
}

RunResult run_single(const ModelParams& params, NewsSource news, const StatsConfig& stats) {
    Simulation sim(params, std::move(news));
    RunResult out;
    out.records = sim.run(params.n_steps);
    out.stats = compute_statistics(after_burn_in(out.records, params.burn_in), stats);
    out.diagnostics = sim.diagnostics();
    out.final_agents = sim.agents();
    out.final_price = sim.state().price;
    return out;
}

RunResult run_single(const ModelParams& params, const StatsConfig& stats) {
    validate(params);
    return run_single(params, default_news(params), stats);
}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::c1_max: return "c1_max";
    case SweepParameter::c2_max: return "c2_max";
    case SweepParameter::alpha: return "alpha";
    }
    return "c1_max";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "c1_max") return SweepParameter::c1_max;
    if (s == "c2_max") return SweepParameter::c2_max;
    if (s == "alpha") return SweepParameter::alpha;
    throw ConfigError("sweep.axis.parameter", "expected c1_max, c2_max or alpha, got \"" + s + "\"");
}

void apply(ModelParams& params, SweepParameter p, double value) {
    switch (p) {
    case SweepParameter::c1_max: params.c1_max = value; break;
    case SweepParameter::c2_max: params.c2_max = value; break;
    case SweepParameter::alpha: params.alpha = value; break;
    }
}

std::size_t SweepSpec::grid_size() const {
    return axis1.values.size() * (axis2 ? axis2->values.size() : 1);
}

std::pair<double, std::optional<double>> SweepSpec::point_values(std::size_t grid_index) const {
    if (!axis2) return {axis1.values.at(grid_index), std::nullopt};
    const auto n2 = axis2->values.size();
    return {axis1.values.at(grid_index / n2), axis2->values.at(grid_index % n2)};
}

ModelParams SweepSpec::point_params(std::size_t grid_index, std::int64_t r) const {
    ModelParams p = base;
    const auto [v1, v2] = point_values(grid_index);
    apply(p, axis1.parameter, v1);
    if (axis2) apply(p, axis2->parameter, *v2);
    p.seed = seed_base + static_cast<std::uint64_t>(r);
    return p;
}

void validate(const SweepSpec& spec) {
    if (spec.axis1.values.empty()) throw ConfigError("sweep.axis1.values", "must not be empty");
    if (spec.axis2) {
        if (spec.axis2->values.empty()) throw ConfigError("sweep.axis2.values", "must not be empty");
        if (spec.axis2->parameter == spec.axis1.parameter) {
            throw ConfigError("sweep.axis2.parameter", "must differ from axis1");
        }
    }
    if (spec.n_realizations <= 0) throw ConfigError("sweep.n_realizations", "must be a positive integer");
    for (std::size_t g = 0; g < spec.grid_size(); ++g) {
        validate(spec.point_params(g, 0));
    }
}

RealizationStats run_realization(const ModelParams& params) {
    Simulation sim(params);
    double best_k = -INFINITY;
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(params.n_steps));
    for (std::int64_t s = 0; s < params.n_steps; ++s) {
        const auto rec = sim.step();
        if (rec.t <= params.burn_in) continue;
        best_k = std::max(best_k, rec.mean_k);
        returns.push_back(rec.ret);
    }
    RealizationStats out;
    if (!returns.empty()) {
        out.max_mean_k = best_k;
        const auto runs = extremal_runs(returns);
        out.max_drawdown = runs.max_drawdown;
        out.max_drawup = runs.max_drawup;
    }
    return out;
}

std::size_t default_worker_count() {
    if (const char* env = std::getenv("AMKT_WORKERS"); env != nullptr && *env != '\0') {
        try {
            const auto n = parse_int(env);
            if (n > 0) return static_cast<std::size_t>(n);
        } catch (const std::invalid_argument&) {
        }
        throw ConfigError("AMKT_WORKERS", "must be a positive integer");
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

Moments moments(std::span<const double> values) {
    Moments m;
    if (values.empty()) return m;
    const auto n = static_cast<double>(values.size());
    m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - m.mean) * (v - m.mean);
        m.stddev = std::sqrt(ss / (n - 1.0));
    }
    return m;
}

namespace {

constexpr const char* journal_header =
    "grid_index,realization,seed,axis1_value,axis2_value,max_mean_k,max_drawdown,max_drawup";

std::string journal_line(const JournalRow& row) {
    std::ostringstream os;
    os << row.grid_index << ',' << row.realization << ',' << row.seed << ',' << format_double(row.axis1_value)
       << ',' << (row.axis2_value ? format_double(*row.axis2_value) : std::string()) << ','
       << format_double(row.stats.max_mean_k) << ',' << format_double(row.stats.max_drawdown) << ','
       << format_double(row.stats.max_drawup) << '\n';
    return os.str();
}

}  // namespace

std::vector<JournalRow> read_journal(const std::filesystem::path& path) {
    std::vector<JournalRow> rows;
    if (!std::filesystem::exists(path)) return rows;
    const auto text = read_file(path);
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::size_t consumed = 0;
    while (std::getline(in, line)) {
        consumed += line.size() + 1;
        const bool terminated = consumed <= text.size();
        if (!header_seen) {
            if (line != journal_header) throw IoError(path, "unexpected journal header");
            header_seen = true;
            continue;
        }
        // an interrupted writer can leave one unterminated trailing line
        if (!terminated) break;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw IoError(path, "malformed journal row: " + line);
        try {
            JournalRow r;
            r.grid_index = static_cast<std::size_t>(parse_uint(f[0]));
            r.realization = parse_int(f[1]);
            r.seed = parse_uint(f[2]);
            r.axis1_value = parse_double(f[3]);
            if (!f[4].empty()) r.axis2_value = parse_double(f[4]);
            r.stats = {parse_double(f[5]), parse_double(f[6]), parse_double(f[7])};
            rows.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw IoError(path, std::string("malformed journal row: ") + e.what());
        }
    }
    return rows;
}

SweepResult aggregate(const SweepSpec& spec, std::span<const JournalRow> rows, std::vector<std::string> failures) {
    const auto grid = spec.grid_size();
    const auto n_real = static_cast<std::size_t>(spec.n_realizations);
    std::vector<std::vector<std::optional<RealizationStats>>> slots(grid,
                                                                    std::vector<std::optional<RealizationStats>>(n_real));
    for (const auto& row : rows) {
        if (row.grid_index >= grid || row.realization < 0 || static_cast<std::size_t>(row.realization) >= n_real) {
            continue;
        }
        auto& slot = slots[row.grid_index][static_cast<std::size_t>(row.realization)];
        if (!slot) slot = row.stats;
    }

    SweepResult result;
    result.axis1 = spec.axis1.parameter;
    if (spec.axis2) result.axis2 = spec.axis2->parameter;
    result.failures = std::move(failures);
    for (std::size_t g = 0; g < grid; ++g) {
        std::vector<double> k;
        std::vector<double> dd;
        std::vector<double> du;
        for (const auto& slot : slots[g]) {
            if (!slot) continue;
            k.push_back(slot->max_mean_k);
            dd.push_back(slot->max_drawdown);
            du.push_back(slot->max_drawup);
        }
        SweepPoint pt;
        std::tie(pt.axis1_value, pt.axis2_value) = spec.point_values(g);
        pt.n_requested = spec.n_realizations;
        pt.n_completed = static_cast<std::int64_t>(k.size());
        pt.complete = pt.n_completed == pt.n_requested;
        pt.max_mean_k = moments(k);
        pt.max_drawdown = moments(dd);
        pt.max_drawup = moments(du);
        result.points.push_back(pt);
    }
    return result;
}

SweepResult run_ensemble(const SweepSpec& spec, const EnsembleOptions& options) {
    validate(spec);
    const RealizationRunner runner = options.runner ? options.runner : RealizationRunner(run_realization);
    const auto grid = spec.grid_size();

    std::vector<JournalRow> rows;
    if (options.journal) {
        rows = read_journal(*options.journal);
        for (const auto& row : rows) {
            if (row.grid_index >= grid) {
                throw ConfigError("journal", "row refers to grid point " + std::to_string(row.grid_index) +
                                                 " outside the sweep");
            }
            const auto [v1, v2] = spec.point_values(row.grid_index);
            if (row.axis1_value != v1 || row.axis2_value != v2 ||
                row.seed != spec.seed_base + static_cast<std::uint64_t>(row.realization)) {
                throw ConfigError("journal", "existing journal does not match this sweep specification");
            }
        }
    }

    std::map<std::pair<std::size_t, std::int64_t>, bool> done;
    for (const auto& row : rows) done[{row.grid_index, row.realization}] = true;

    std::vector<std::pair<std::size_t, std::int64_t>> jobs;
    for (std::size_t g = 0; g < grid; ++g) {
        for (std::int64_t r = 0; r < spec.n_realizations; ++r) {
            if (!done.contains({g, r})) jobs.emplace_back(g, r);
        }
    }
    if (options.shuffle_jobs) {
        auto rng = make_engine(*options.shuffle_jobs);
        std::shuffle(jobs.begin(), jobs.end(), rng);
    }

    std::ofstream journal;
    if (options.journal) {
        const bool fresh = !std::filesystem::exists(*options.journal) || std::filesystem::file_size(*options.journal) == 0;
        if (!fresh) {
            // drop a partial row left by an interrupted writer before appending
            const auto text = read_file(*options.journal);
            if (text.back() != '\n') write_file_atomic(*options.journal, text.substr(0, text.find_last_of('\n') + 1));
        }
        journal.open(*options.journal, std::ios::app | std::ios::binary);
        if (!journal) throw IoError(*options.journal, "cannot open journal for appending");
        if (fresh) journal << journal_header << '\n' << std::flush;
    }

    std::mutex mu;
    std::vector<std::string> failures;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const auto j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const auto [g, r] = jobs[j];
            const auto params = spec.point_params(g, r);
            std::optional<RealizationStats> stats;
            std::string error;
            for (int attempt = 0; attempt < std::max(1, options.max_attempts) && !stats; ++attempt) {
                try {
                    stats = runner(params);
                } catch (const std::exception& e) {
                    error = e.what();
                }
            }
            std::lock_guard lock(mu);
            if (!stats) {
                failures.push_back("grid point " + std::to_string(g) + " realization " + std::to_string(r) + ": " +
                                   error);
                continue;
            }
            JournalRow row;
            row.grid_index = g;
            row.realization = r;
            row.seed = params.seed;
            std::tie(row.axis1_value, row.axis2_value) = spec.point_values(g);
            row.stats = *stats;
            rows.push_back(row);
            if (journal.is_open()) journal << journal_line(row) << std::flush;
        }
    };

    const auto n_workers = std::min(jobs.size(), options.workers > 0 ? options.workers : default_worker_count());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    std::sort(failures.begin(), failures.end());
    return aggregate(spec, rows, std::move(failures));
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> first_crossing(std::span<const std::pair<double, double>> curve, double level) {
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const auto [x0, y0] = curve[i];
        const auto [x1, y1] = curve[i + 1];
        if (y0 < level && y1 >= level) {
            return x0 + (level - y0) / (y1 - y0) * (x1 - x0);
        }
    }
    return std::nullopt;
}

}  // namespace

TransitionEstimate detect_transition(std::span<const std::pair<double, double>> curve) {
    if (curve.size() < 6) {
        throw std::invalid_argument("detect_transition: need at least 6 points");
    }
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        if (!(curve[i + 1].first > curve[i].first)) {
            throw std::invalid_argument("detect_transition: C1 values must be strictly increasing");
        }
    }
    TransitionEstimate est;
    const auto n = curve.size();
    est.low_plateau = 0.5 * (curve[0].second + curve[1].second);
    est.high_plateau = 0.5 * (curve[n - 2].second + curve[n - 1].second);
    const double span = est.high_plateau - est.low_plateau;
    if (!(span > 0.0)) {
        est.diagnostic = "no transition in range";
        return est;
    }
    const auto mid = first_crossing(curve, est.low_plateau + 0.5 * span);
    const auto q1 = first_crossing(curve, est.low_plateau + 0.25 * span);
    const auto q3 = first_crossing(curve, est.low_plateau + 0.75 * span);
    if (!mid || !q1 || !q3) {
        est.diagnostic = "no transition in range";
        return est;
    }
    est.found = true;
    est.c1_star = *mid;
    est.width = *q3 - *q1;
    return est;
}

std::vector<std::pair<double, double>> transition_curve(const SweepResult& result, std::optional<double> axis2_value) {
    std::vector<std::pair<double, double>> curve;
    for (const auto& pt : result.points) {
        if (axis2_value && pt.axis2_value != axis2_value) continue;
        if (pt.n_completed == 0) continue;
        curve.emplace_back(pt.axis1_value, pt.max_mean_k.mean);
    }
    return curve;
}

// ---------------------------------------------------------------------------

StreakDiagnostics analyze_streak(std::span<const StepRecord> records, const ScriptedNews& streak,
                                 const StreakOptions& options) {
    StreakDiagnostics d;
    d.streak_start = streak.start_step;
    d.streak_end = streak.start_step + static_cast<std::int64_t>(streak.values.size()) - 1;

    auto abs_u_at = [&](std::int64_t t) -> std::optional<double> {
        const auto it = std::lower_bound(records.begin(), records.end(), t,
                                         [](const StepRecord& r, std::int64_t v) { return r.t < v; });
        if (it == records.end() || it->t != t) return std::nullopt;
        return std::abs(it->u);
    };

    if (streak.values.empty()) {
        d.diagnostic = "no response";
        return d;
    }

    // u(t) consumes n(t-1), so the streak drives u over [start+1, end+1]
    d.baseline_abs_u = abs_u_at(d.streak_start).value_or(0.0);
    double driven_peak = 0.0;
    for (auto t = d.streak_start + 1; t <= d.streak_end + 1; ++t) {
        if (auto v = abs_u_at(t)) driven_peak = std::max(driven_peak, *v);
    }
    d.responded = driven_peak > d.baseline_abs_u;
    if (!d.responded) {
        d.diagnostic = "no response";
        return d;
    }

    double best = -1.0;
    for (auto t = d.streak_start + 1; t <= d.streak_end + options.peak_slack; ++t) {
        if (auto v = abs_u_at(t); v && *v > best) {
            best = *v;
            d.peak_step = t;
        }
    }
    d.peak_u = best;

    // least-squares line through log|u| after the peak
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto t = d.peak_step; t <= d.peak_step + options.fit_window; ++t) {
        if (auto v = abs_u_at(t); v && *v > 0.0) {
            xs.push_back(static_cast<double>(t - d.peak_step));
            ys.push_back(std::log(*v));
        }
    }
    if (xs.size() < 3) {
        d.diagnostic = "too few points after the peak to fit a decay";
        return d;
    }
    const auto n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    d.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    if (slope < 0.0) {
        d.efold_time = -1.0 / slope;
        d.diagnostic = "ok";
    } else {
        d.diagnostic = "|u| does not decay after the peak";
    }
    return d;
}

StreakResult scenario_streak(const ModelParams& params, const ScriptedNews& streak, const StreakOptions& options) {
    validate(params);
    Simulation sim(params, scripted_news(params, {streak}));
    StreakResult out;
    out.records = sim.run(params.n_steps);
    out.diagnostics = analyze_streak(out.records, streak, options);
    return out;
}

StreakEnsemble streak_ensemble(const ModelParams& params, const ScriptedNews& streak,
                               std::span<const std::uint64_t> seeds, const StreakOptions& options) {
    validate(params);
    if (seeds.empty()) throw std::invalid_argument("streak_ensemble needs at least one seed");
    const auto end = streak.start_step + static_cast<std::int64_t>(streak.values.size()) - 1;
    if (streak.values.empty() || end + 1 > params.n_steps) {
        throw std::invalid_argument("streak must end before the last simulated step");
    }

    StreakEnsemble out;
    const auto n = static_cast<std::size_t>(params.n_steps);
    std::vector<double> sum(n, 0.0);
    for (const auto seed : seeds) {
        ModelParams p = params;
        p.seed = seed;
        Simulation sim(p, scripted_news(p, {streak}));
        const auto records = sim.run(p.n_steps);
        const double sign = records[static_cast<std::size_t>(end)].u >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) sum[i] += sign * records[i].u;
    }

    std::vector<StepRecord> mean(n);
    out.t.resize(n);
    out.mean_aligned_u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean[i].t = static_cast<std::int64_t>(i) + 1;
        mean[i].u = sum[i] / static_cast<double>(seeds.size());
        out.t[i] = mean[i].t;
        out.mean_aligned_u[i] = mean[i].u;
    }
    out.diagnostics = analyze_streak(mean, streak, options);
    return out;
}

PriceExcursion price_excursion(std::span<const StepRecord> records, const ScriptedNews& streak, std::int64_t horizon) {
    const auto end = streak.start_step + static_cast<std::int64_t>(streak.values.size()) - 1;
    auto log_price_at = [&](std::int64_t t) {
        const auto it = std::lower_bound(records.begin(), records.end(), t,
                                         [](const StepRecord& r, std::int64_t v) { return r.t < v; });
        if (it == records.end() || it->t != t) {
            throw AnalyticsError("records do not cover step " + std::to_string(t));
        }
        return it->log_price;
    };
    const double base = log_price_at(streak.start_step - 1);
    PriceExcursion e;
    for (auto t = streak.start_step; t <= end + horizon; ++t) {
        e.max_abs = std::max(e.max_abs, std::abs(log_price_at(t) - base));
    }
    e.at_horizon = std::abs(log_price_at(end + horizon) - base);
    return e;
}

}  // namespace amkt
