#include "amkt/io.hpp"

#include "amkt/csv.hpp"

#include <set>
#include <sstream>

namespace amkt {

using nlohmann::json;

namespace {

/// Strict reader over one JSON object: tracks consumed keys so leftovers
/// can be reported as unknown fields.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
    }

    [[nodiscard]] std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void real(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) throw ConfigError(key_path(key), "must be a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, std::int64_t& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(key_path(key), "must be an integer");
            if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
                throw ConfigError(key_path(key), "is out of range");
            }
            out = v->get<std::int64_t>();
        }
    }

    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(key_path(key), "must be a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void size(const std::string& key, std::size_t& out) {
        std::uint64_t tmp = out;
        unsigned_integer(key, tmp);
        out = static_cast<std::size_t>(tmp);
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(key_path(key), "must be true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) throw ConfigError(key_path(key), "must be a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) throw ConfigError(key_path(it.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> real_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(path, "must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

/// Re-labels errors from enum parsers with the full key path.
template <typename F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(path, std::string(e.what()).substr(e.field().size() + 2));
    }
}

ModelParams parse_model(const json& j, const std::string& path) {
    ModelParams p;
    ObjectReader r(j, path);
    r.integer("n_agents", p.n_agents);
    r.real("c1_max", p.c1_max);
    r.real("c2_max", p.c2_max);
    r.real("c3_max", p.c3_max);
    r.real("omega_max", p.omega_max);
    r.real("alpha", p.alpha);
    r.real("lambda", p.lambda);
    r.real("g", p.g);
    r.real("initial_cash", p.initial_cash);
    r.real("initial_stocks", p.initial_stocks);
    r.real("initial_price", p.initial_price);
    std::string variant = to_string(p.clearing_variant);
    r.string("clearing_variant", variant);
    p.clearing_variant = with_path(r.key_path("clearing_variant"), [&] { return clearing_variant_from_string(variant); });
    if (const auto* topo = r.find("topology")) {
        ObjectReader t(*topo, r.key_path("topology"));
        std::string kind = to_string(p.topology.kind);
        t.string("kind", kind);
        p.topology.kind = with_path(t.key_path("kind"), [&] { return topology_kind_from_string(kind); });
        t.real("mean_degree", p.topology.mean_degree);
        t.finish();
    }
    r.unsigned_integer("seed", p.seed);
    r.integer("n_steps", p.n_steps);
    r.real("sigma_init", p.sigma_init);
    r.real("sigma_floor", p.sigma_floor);
    r.integer("burn_in", p.burn_in);
    r.finish();
    try {
        validate(p);
    } catch (const ConfigError& e) {
        throw ConfigError(path + "." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    return p;
}

NewsConfig parse_news(const json& j, const std::string& path) {
    NewsConfig n;
    ObjectReader r(j, path);
    std::string kind = "gaussian";
    r.string("kind", kind);
    if (kind == "gaussian") {
        n.kind = NewsKind::gaussian;
    } else if (kind == "scripted") {
        n.kind = NewsKind::scripted;
    } else {
        throw ConfigError(r.key_path("kind"), "expected gaussian or scripted, got \"" + kind + "\"");
    }
    if (const auto* entries = r.find("entries")) {
        const auto epath = r.key_path("entries");
        if (n.kind != NewsKind::scripted) throw ConfigError(epath, "only allowed for scripted news");
        if (!entries->is_array()) throw ConfigError(epath, "must be an array");
        for (std::size_t i = 0; i < entries->size(); ++i) {
            const auto ipath = epath + "[" + std::to_string(i) + "]";
            ObjectReader e((*entries)[i], ipath);
            ScriptedNews s;
            if (!e.find("start_step")) throw ConfigError(e.key_path("start_step"), "is required");
            e.integer("start_step", s.start_step);
            if (s.start_step < NewsSource::first_step) throw ConfigError(e.key_path("start_step"), "must be >= 1");
            const auto* values = e.find("values");
            if (!values) throw ConfigError(e.key_path("values"), "is required");
            s.values = real_array(*values, e.key_path("values"));
            e.finish();
            n.entries.push_back(std::move(s));
        }
    }
    r.finish();
    if (n.kind == NewsKind::scripted) {
        try {
            (void)NewsSource::scripted(n.entries, 0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path + ".entries", e.what());
        }
    }
    return n;
}

BinSpec parse_bins(const json& j, const std::string& path, BinSpec b) {
    ObjectReader r(j, path);
    r.real("lo", b.lo);
    r.real("hi", b.hi);
    r.size("bins", b.bins);
    r.finish();
    if (b.bins == 0) throw ConfigError(r.key_path("bins"), "must be positive");
    if (!(b.hi > b.lo)) throw ConfigError(r.key_path("hi"), "must exceed lo");
    return b;
}

SweepAxis parse_axis(const json& j, const std::string& path) {
    SweepAxis a;
    ObjectReader r(j, path);
    std::string name;
    if (!r.find("parameter")) throw ConfigError(r.key_path("parameter"), "is required");
    r.string("parameter", name);
    a.parameter = with_path(r.key_path("parameter"), [&] { return sweep_parameter_from_string(name); });
    const auto* values = r.find("values");
    if (!values) throw ConfigError(r.key_path("values"), "is required");
    a.values = real_array(*values, r.key_path("values"));
    if (a.values.empty()) throw ConfigError(r.key_path("values"), "must not be empty");
    r.finish();
    return a;
}

SweepConfig parse_sweep(const json& j, const std::string& path) {
    SweepConfig s;
    ObjectReader r(j, path);
    const auto* a1 = r.find("axis1");
    if (!a1) throw ConfigError(r.key_path("axis1"), "is required");
    s.axis1 = parse_axis(*a1, r.key_path("axis1"));
    if (const auto* a2 = r.find("axis2")) s.axis2 = parse_axis(*a2, r.key_path("axis2"));
    r.integer("n_realizations", s.n_realizations);
    if (s.n_realizations <= 0) throw ConfigError(r.key_path("n_realizations"), "must be a positive integer");
    r.unsigned_integer("seed_base", s.seed_base);
    r.finish();
    return s;
}

json axis_json(const SweepAxis& a) { return {{"parameter", to_string(a.parameter)}, {"values", a.values}}; }

json bins_json(const BinSpec& b) { return {{"lo", b.lo}, {"hi", b.hi}, {"bins", b.bins}}; }

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    ObjectReader r(j, "");
    if (const auto* m = r.find("model")) c.model = parse_model(*m, "model");
    if (const auto* n = r.find("news")) c.news = parse_news(*n, "news");
    r.string("output_dir", c.output_dir);
    if (const auto* e = r.find("emit")) {
        ObjectReader er(*e, "emit");
        er.boolean("timeseries", c.emit.timeseries);
        er.boolean("stats", c.emit.stats);
        er.boolean("agents", c.emit.agents);
        er.finish();
    }
    if (const auto* s = r.find("statistics")) {
        ObjectReader sr(*s, "statistics");
        sr.size("acf_max_lag", c.stats.acf_max_lag);
        if (const auto* b = sr.find("return_bins")) c.stats.return_bins = parse_bins(*b, "statistics.return_bins", c.stats.return_bins);
        if (const auto* b = sr.find("mean_k_bins")) c.stats.mean_k_bins = parse_bins(*b, "statistics.mean_k_bins", c.stats.mean_k_bins);
        sr.finish();
    }
    if (const auto* s = r.find("streak")) {
        ObjectReader sr(*s, "streak");
        sr.integer("peak_slack", c.streak.peak_slack);
        sr.integer("fit_window", c.streak.fit_window);
        sr.finish();
        if (c.streak.peak_slack < 0) throw ConfigError("streak.peak_slack", "must be nonnegative");
        if (c.streak.fit_window < 2) throw ConfigError("streak.fit_window", "must be at least 2");
    }
    if (const auto* s = r.find("sweep")) c.sweep = parse_sweep(*s, "sweep");
    r.finish();
    if (c.sweep) validate(c.sweep_spec());
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError("config", e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", path.string() + ": invalid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    const auto& m = c.model;
    json topo = {{"kind", to_string(m.topology.kind)}};
    if (m.topology.kind == TopologyKind::random) topo["mean_degree"] = m.topology.mean_degree;
    json j;
    j["model"] = {
        {"n_agents", m.n_agents},
        {"c1_max", m.c1_max},
        {"c2_max", m.c2_max},
        {"c3_max", m.c3_max},
        {"omega_max", m.omega_max},
        {"alpha", m.alpha},
        {"lambda", m.lambda},
        {"g", m.g},
        {"initial_cash", m.initial_cash},
        {"initial_stocks", m.initial_stocks},
        {"initial_price", m.initial_price},
        {"clearing_variant", to_string(m.clearing_variant)},
        {"topology", topo},
        {"seed", m.seed},
        {"n_steps", m.n_steps},
        {"sigma_init", m.sigma_init},
        {"sigma_floor", m.sigma_floor},
        {"burn_in", m.burn_in},
    };
    json news = {{"kind", c.news.kind == NewsKind::scripted ? "scripted" : "gaussian"}};
    if (c.news.kind == NewsKind::scripted) {
        news["entries"] = json::array();
        for (const auto& e : c.news.entries) news["entries"].push_back({{"start_step", e.start_step}, {"values", e.values}});
    }
    j["news"] = news;
    j["output_dir"] = c.output_dir;
    j["emit"] = {{"timeseries", c.emit.timeseries}, {"stats", c.emit.stats}, {"agents", c.emit.agents}};
    j["statistics"] = {{"acf_max_lag", c.stats.acf_max_lag},
                       {"return_bins", bins_json(c.stats.return_bins)},
                       {"mean_k_bins", bins_json(c.stats.mean_k_bins)}};
    j["streak"] = {{"peak_slack", c.streak.peak_slack},
                   {"fit_window", c.streak.fit_window}};
    if (c.sweep) {
        json s = {{"axis1", axis_json(c.sweep->axis1)},
                  {"n_realizations", c.sweep->n_realizations},
                  {"seed_base", c.sweep->seed_base}};
        if (c.sweep->axis2) s["axis2"] = axis_json(*c.sweep->axis2);
        j["sweep"] = s;
    }
    return j;
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

SweepSpec RunConfig::sweep_spec() const {
    if (!sweep) throw ConfigError("sweep", "is required for a sweep run");
    SweepSpec s;
    s.base = model;
    s.axis1 = sweep->axis1;
    s.axis2 = sweep->axis2;
    s.n_realizations = sweep->n_realizations;
    s.seed_base = sweep->seed_base;
    return s;
}

NewsSource RunConfig::make_news() const {
    return news.kind == NewsKind::scripted ? scripted_news(model, news.entries) : default_news(model);
}

// ---------------------------------------------------------------------------

std::string format_timeseries(const std::vector<StepRecord>& records) {
    std::string out = timeseries_header;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.t);
        for (const double v : {r.price, r.log_price, r.ret, r.news, r.u, r.mean_k, r.activity, r.total_cash,
                               r.total_stocks}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string format_stats(const RunStatistics& st) {
    std::ostringstream os;
    os << stats_header << '\n';
    auto row = [&os](const char* name, std::size_t idx, double v) {
        os << name << ',' << idx << ',' << format_double(v) << '\n';
    };
    row("n_records", 0, static_cast<double>(st.n_records));
    row("max_mean_k", 0, st.max_mean_k);
    row("max_drawdown", 0, st.max_drawdown);
    row("max_drawup", 0, st.max_drawup);
    row("excess_kurtosis", 0, st.kurtosis);
    for (std::size_t l = 0; l < st.return_acf.size(); ++l) row("return_acf", l, st.return_acf[l]);
    for (std::size_t l = 0; l < st.vol_acf.size(); ++l) row("vol_acf", l, st.vol_acf[l]);
    auto hist = [&](const char* prefix, const Histogram& h) {
        const std::string p(prefix);
        for (std::size_t b = 0; b <= h.spec.bins; ++b) row((p + "_edge").c_str(), b, h.bin_lo(b));
        for (std::size_t b = 0; b < h.mass.size(); ++b) row((p + "_mass").c_str(), b, h.mass[b]);
        row((p + "_underflow").c_str(), 0, h.underflow);
        row((p + "_overflow").c_str(), 0, h.overflow);
    };
    hist("return_hist", st.return_histogram);
    hist("mean_k_hist", st.mean_k_histogram);
    return os.str();
}

std::string format_sweep(const SweepResult& result) {
    std::ostringstream os;
    os << sweep_header << '\n';
    for (const auto& p : result.points) {
        os << to_string(result.axis1) << ',' << format_double(p.axis1_value) << ','
           << (result.axis2 ? to_string(*result.axis2) : std::string()) << ','
           << (p.axis2_value ? format_double(*p.axis2_value) : std::string()) << ',' << p.n_requested << ','
           << p.n_completed << ',' << (p.complete ? 1 : 0);
        for (const auto& m : {p.max_mean_k, p.max_drawdown, p.max_drawup}) {
            os << ',' << format_double(m.mean) << ',' << format_double(m.stddev);
        }
        os << '\n';
    }
    return os.str();
}

void emit_timeseries(const std::vector<StepRecord>& records, const std::filesystem::path& path) {
    write_file_atomic(path, format_timeseries(records));
}

void emit_stats(const RunStatistics& stats, const std::filesystem::path& path) {
    write_file_atomic(path, format_stats(stats));
}

void emit_sweep(const SweepResult& result, const std::filesystem::path& path) {
    write_file_atomic(path, format_sweep(result));
}

void emit_agents(const std::vector<Agent>& agents, double price, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "agent,c1,c2,c3,threshold,cash,stocks,wealth,mean_trust\n";
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& a = agents[i];
        double trust = 0.0;
        for (const double k : a.trust) trust += k;
        if (!a.trust.empty()) trust /= static_cast<double>(a.trust.size());
        os << i;
        for (const double v : {a.c1, a.c2, a.c3, a.threshold, a.cash, a.stocks, a.cash + a.stocks * price, trust}) {
            os << ',' << format_double(v);
        }
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

void emit_streak(const StreakDiagnostics& d, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "key,value\n";
    os << "streak_start," << d.streak_start << '\n';
    os << "streak_end," << d.streak_end << '\n';
    os << "responded," << (d.responded ? 1 : 0) << '\n';
    os << "baseline_abs_u," << format_double(d.baseline_abs_u) << '\n';
    os << "peak_step," << d.peak_step << '\n';
    os << "peak_u," << format_double(d.peak_u) << '\n';
    os << "efold_time," << (d.efold_time ? format_double(*d.efold_time) : std::string()) << '\n';
    os << "fit_r2," << format_double(d.fit_r2) << '\n';
    os << "diagnostic," << d.diagnostic << '\n';
    write_file_atomic(path, os.str());
}

void emit_transitions(const SweepResult& result, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "axis2_name,axis2_value,found,c1_star,width,low_plateau,high_plateau\n";
    std::vector<std::optional<double>> slices;
    for (const auto& p : result.points) {
        if (std::find(slices.begin(), slices.end(), p.axis2_value) == slices.end()) slices.push_back(p.axis2_value);
    }
    for (const auto& s : slices) {
        const auto curve = transition_curve(result, s);
        TransitionEstimate est;
        if (curve.size() >= 6) {
            est = detect_transition(curve);
        } else {
            est.diagnostic = "fewer than 6 points";
        }
        os << (result.axis2 ? to_string(*result.axis2) : std::string()) << ','
           << (s ? format_double(*s) : std::string()) << ',' << (est.found ? 1 : 0) << ','
           << format_double(est.c1_star) << ',' << format_double(est.width) << ',' << format_double(est.low_plateau)
           << ',' << format_double(est.high_plateau) << '\n';
    }
    write_file_atomic(path, os.str());
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::string& header,
                                               std::size_t columns) {
    const auto text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) throw IoError(path, "unexpected header");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != columns) throw IoError(path, "expected " + std::to_string(columns) + " columns: " + line);
        rows.push_back(std::move(f));
    }
    return rows;
}

}  // namespace

std::vector<StepRecord> read_timeseries(const std::filesystem::path& path) {
    std::vector<StepRecord> out;
    try {
        for (const auto& f : read_csv(path, timeseries_header, 10)) {
            StepRecord r;
            r.t = parse_int(f[0]);
            r.price = parse_double(f[1]);
            r.log_price = parse_double(f[2]);
            r.ret = parse_double(f[3]);
            r.news = parse_double(f[4]);
            r.u = parse_double(f[5]);
            r.mean_k = parse_double(f[6]);
            r.activity = parse_double(f[7]);
            r.total_cash = parse_double(f[8]);
            r.total_stocks = parse_double(f[9]);
            out.push_back(r);
        }
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    }
    return out;
}

SweepResult read_sweep(const std::filesystem::path& path) {
    SweepResult result;
    try {
        bool first = true;
        for (const auto& f : read_csv(path, sweep_header, 13)) {
            if (first) {
                result.axis1 = sweep_parameter_from_string(f[0]);
                if (!f[2].empty()) result.axis2 = sweep_parameter_from_string(f[2]);
                first = false;
            }
            SweepPoint p;
            p.axis1_value = parse_double(f[1]);
            if (!f[3].empty()) p.axis2_value = parse_double(f[3]);
            p.n_requested = parse_int(f[4]);
            p.n_completed = parse_int(f[5]);
            p.complete = f[6] == "1";
            p.max_mean_k = {parse_double(f[7]), parse_double(f[8])};
            p.max_drawdown = {parse_double(f[9]), parse_double(f[10])};
            p.max_drawup = {parse_double(f[11]), parse_double(f[12])};
            result.points.push_back(p);
        }
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    } catch (const ConfigError& e) {
        throw IoError(path, e.what());
    }
    return result;
}

}  // namespace amkt
