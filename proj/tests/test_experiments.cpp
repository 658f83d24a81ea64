#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amkt/csv.hpp"
#include "amkt/experiments.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include <unistd.h>

using namespace amkt;
namespace fs = std::filesystem;

namespace {

ModelParams small_params() {
    ModelParams p;
    p.n_agents = 100;
    p.n_steps = 400;
    p.burn_in = 50;
    return p;
}

SweepSpec small_spec() {
    SweepSpec s;
    s.base = small_params();
    s.axis1 = {SweepParameter::c1_max, {0.5, 2.0, 4.0}};
    s.axis2 = SweepAxis{SweepParameter::c2_max, {0.5, 1.0}};
    s.n_realizations = 3;
    s.seed_base = 40;
    return s;
}

fs::path temp_path(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("amkt_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove(p);
    return p;
}

// records with u = 0 before the streak, a driven rise, then exact alpha decay
std::vector<StepRecord> synthetic_streak_records(std::int64_t start, std::int64_t len, double alpha) {
    std::vector<StepRecord> recs;
    double u = 0.0;
    for (std::int64_t t = 1; t <= start + len + 150; ++t) {
        if (t > start && t <= start + len) {
            u = alpha * u + (1.0 - alpha) * 2.0;
        } else if (t > start + len) {
            u *= alpha;
        }
        StepRecord r;
        r.t = t;
        r.u = -u;
        recs.push_back(r);
    }
    return recs;
}

}  // namespace

TEST_CASE("run_single: inert market gives a flat price and zero statistics") {
    auto p = small_params();
    p.c1_max = p.c2_max = p.c3_max = 0.0;
    const auto res = run_single(p);
    for (const auto& r : res.records) REQUIRE(r.price == 1.0);
    CHECK(res.stats.max_mean_k == 0.0);
    CHECK(res.stats.max_drawdown == 0.0);
    CHECK(res.stats.max_drawup == 0.0);
    CHECK(res.stats.kurtosis == 0.0);
}

TEST_CASE("run_single: same parameters twice give identical statistics") {
    const auto p = small_params();
    const auto a = run_single(p);
    const auto b = run_single(p);
    CHECK(a.records == b.records);
    CHECK(a.stats == b.stats);
    CHECK(a.stats.n_records == static_cast<std::size_t>(p.n_steps - p.burn_in));
}

TEST_CASE("sweep spec: grid order and seeds") {
    const auto s = small_spec();
    CHECK(s.grid_size() == 6);
    CHECK(s.point_values(0) == std::pair<double, std::optional<double>>{0.5, 0.5});
    CHECK(s.point_values(1) == std::pair<double, std::optional<double>>{0.5, 1.0});
    CHECK(s.point_values(5) == std::pair<double, std::optional<double>>{4.0, 1.0});
    const auto p = s.point_params(3, 2);
    CHECK(p.c1_max == 2.0);
    CHECK(p.c2_max == 1.0);
    CHECK(p.seed == 42);
}

TEST_CASE("sweep spec: validation") {
    auto s = small_spec();
    s.n_realizations = 0;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = small_spec();
    s.axis1.values.clear();
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = small_spec();
    s.axis1 = {SweepParameter::alpha, {0.5, 1.5}};
    CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("ensemble: one point and one realization equals run_single") {
    SweepSpec s;
    s.base = small_params();
    s.axis1 = {SweepParameter::c1_max, {3.0}};
    s.n_realizations = 1;
    s.seed_base = 9;
    const auto res = run_ensemble(s, {.workers = 1});
    REQUIRE(res.points.size() == 1);
    const auto single = run_single(s.point_params(0, 0));
    CHECK(res.points[0].n_completed == 1);
    CHECK(res.points[0].complete);
    CHECK(res.points[0].max_mean_k.mean == single.stats.max_mean_k);
    CHECK(res.points[0].max_drawdown.mean == single.stats.max_drawdown);
    CHECK(res.points[0].max_drawup.mean == single.stats.max_drawup);
    CHECK(res.points[0].max_mean_k.stddev == 0.0);
}

TEST_CASE("ensemble: execution order and worker count do not change the result") {
    const auto s = small_spec();
    const auto a = run_ensemble(s, {.workers = 1});
    const auto b = run_ensemble(s, {.workers = 3, .shuffle_jobs = 77});
    const auto c = run_ensemble(s, {.workers = 2, .shuffle_jobs = 5});
    CHECK(a == b);
    CHECK(a == c);
    for (const auto& pt : a.points) {
        CHECK(pt.complete);
        CHECK(std::isfinite(pt.max_mean_k.mean));
    }
}

TEST_CASE("ensemble: moments match a direct computation") {
    const auto s = small_spec();
    std::map<std::pair<std::size_t, std::int64_t>, RealizationStats> seen;
    std::mutex mu;
    EnsembleOptions opt;
    opt.workers = 2;
    opt.runner = [&](const ModelParams& p) {
        const auto st = run_realization(p);
        for (std::size_t g = 0; g < s.grid_size(); ++g) {
            for (std::int64_t r = 0; r < s.n_realizations; ++r) {
                if (s.point_params(g, r) == p) {
                    std::lock_guard lock(mu);
                    seen[{g, r}] = st;
                }
            }
        }
        return st;
    };
    const auto res = run_ensemble(s, opt);
    for (std::size_t g = 0; g < s.grid_size(); ++g) {
        double sum = 0.0;
        for (std::int64_t r = 0; r < 3; ++r) sum += seen.at({g, r}).max_drawdown;
        const double mean = sum / 3.0;
        double ss = 0.0;
        for (std::int64_t r = 0; r < 3; ++r) ss += std::pow(seen.at({g, r}).max_drawdown - mean, 2);
        CHECK(res.points[g].max_drawdown.mean == doctest::Approx(mean).epsilon(1e-14));
        CHECK(res.points[g].max_drawdown.stddev == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("ensemble: a transient failure is retried, a persistent one marks the point incomplete") {
    auto s = small_spec();
    s.axis2.reset();
    std::mutex mu;
    std::map<std::uint64_t, int> calls;
    EnsembleOptions opt;
    opt.workers = 2;
    opt.runner = [&](const ModelParams& p) {
        int n = 0;
        {
            std::lock_guard lock(mu);
            n = ++calls[p.seed * 100 + static_cast<std::uint64_t>(p.c1_max * 10)];
        }
        if (p.c1_max == 2.0 && p.seed == 41) throw std::runtime_error("worker crashed");
        if (p.c1_max == 4.0 && p.seed == 40 && n == 1) throw std::runtime_error("flaky");
        return RealizationStats{p.c1_max, -1.0, 1.0};
    };
    const auto res = run_ensemble(s, opt);
    REQUIRE(res.points.size() == 3);
    CHECK(res.points[0].complete);
    CHECK_FALSE(res.points[1].complete);
    CHECK(res.points[1].n_completed == 2);
    CHECK(res.points[1].max_mean_k.mean == 2.0);
    CHECK(res.points[2].complete);
    REQUIRE(res.failures.size() == 1);
    CHECK(res.failures[0].find("worker crashed") != std::string::npos);
    CHECK(calls.at(41 * 100 + 20) == 2);
    CHECK(calls.at(40 * 100 + 40) == 2);
}

TEST_CASE("ensemble: journal resume and extension reuse finished realizations") {
    const auto journal = temp_path("journal.csv");
    auto s = small_spec();
    std::atomic<int> calls{0};
    EnsembleOptions opt;
    opt.workers = 2;
    opt.journal = journal;
    opt.runner = [&](const ModelParams& p) {
        ++calls;
        return run_realization(p);
    };
    const auto full = run_ensemble(s, opt);
    CHECK(calls == 18);

    SUBCASE("complete journal needs no work") {
        calls = 0;
        CHECK(run_ensemble(s, opt) == full);
        CHECK(calls == 0);
    }
    SUBCASE("interrupted journal resumes the missing jobs") {
        const auto text = read_file(journal);
        // keep the header and five rows, plus half of the sixth
        std::size_t pos = 0;
        for (int i = 0; i < 6; ++i) pos = text.find('\n', pos) + 1;
        write_file_atomic(journal, text.substr(0, pos + 10));
        calls = 0;
        CHECK(run_ensemble(s, opt) == full);
        CHECK(calls == 13);
        CHECK(read_journal(journal).size() == 18);
    }
    SUBCASE("more realizations only run the new seeds") {
        s.n_realizations = 5;
        calls = 0;
        const auto more = run_ensemble(s, opt);
        CHECK(calls == 12);
        auto fresh_spec = s;
        const auto fresh = run_ensemble(fresh_spec, {.workers = 1});
        CHECK(more == fresh);
    }
    SUBCASE("a journal from a different sweep is rejected") {
        s.seed_base = 1000;
        CHECK_THROWS_AS((void)run_ensemble(s, opt), ConfigError);
    }
}

TEST_CASE("aggregate: independent of row order") {
    const auto s = small_spec();
    std::vector<JournalRow> rows;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t g = 0; g < s.grid_size(); ++g) {
        for (std::int64_t r = 0; r < s.n_realizations; ++r) {
            JournalRow row;
            row.grid_index = g;
            row.realization = r;
            row.seed = s.seed_base + static_cast<std::uint64_t>(r);
            std::tie(row.axis1_value, row.axis2_value) = s.point_values(g);
            row.stats = {u(rng), -u(rng), u(rng)};
            rows.push_back(row);
        }
    }
    const auto a = aggregate(s, rows);
    for (int k = 0; k < 10; ++k) {
        std::shuffle(rows.begin(), rows.end(), rng);
        CHECK(aggregate(s, rows) == a);
    }
}

TEST_CASE("ensemble: C1 = 4 builds far larger trust than C1 = 0 or 2") {
    SweepSpec s;
    s.base.n_steps = 5000;
    s.axis1 = {SweepParameter::c1_max, {0.0, 2.0, 4.0}};
    s.n_realizations = 2;
    s.seed_base = 500;
    const auto res = run_ensemble(s, {.workers = 1});
    const double k0 = res.points[0].max_mean_k.mean;
    const double k2 = res.points[1].max_mean_k.mean;
    const double k4 = res.points[2].max_mean_k.mean;
    INFO("max_mean_k: " << k0 << ' ' << k2 << ' ' << k4);
    CHECK(k4 > 3.0 * k0);
    CHECK(k4 > 3.0 * k2);
}

TEST_CASE("detect_transition") {
    SUBCASE("step function at 3") {
        std::vector<std::pair<double, double>> curve;
        for (int i = 0; i <= 5000; ++i) {
            const double x = i * 0.001;
            curve.emplace_back(x, x >= 3.0 - 1e-12 ? 1.0 : 0.0);
        }
        const auto e = detect_transition(curve);
        REQUIRE(e.found);
        CHECK(std::abs(e.c1_star - 3.0) <= 0.001);
        CHECK(e.width <= 0.001);
    }
    SUBCASE("linear ramp over [2, 4]") {
        std::vector<std::pair<double, double>> curve;
        for (int i = 0; i <= 10; ++i) {
            const double x = 0.5 * i;
            curve.emplace_back(x, std::clamp((x - 2.0) / 2.0, 0.0, 1.0) * 4.0 + 0.1);
        }
        const auto e = detect_transition(curve);
        REQUIRE(e.found);
        CHECK(e.c1_star == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(e.width == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.low_plateau == doctest::Approx(0.1));
        CHECK(e.high_plateau == doctest::Approx(4.1));
    }
    SUBCASE("flat curve") {
        std::vector<std::pair<double, double>> curve;
        for (int i = 0; i < 8; ++i) curve.emplace_back(i, 1.0);
        const auto e = detect_transition(curve);
        CHECK_FALSE(e.found);
        CHECK(e.diagnostic == "no transition in range");
    }
    SUBCASE("bad input") {
        std::vector<std::pair<double, double>> few{{0, 0}, {1, 1}};
        CHECK_THROWS_AS((void)detect_transition(few), std::invalid_argument);
        std::vector<std::pair<double, double>> unsorted{{0, 0}, {1, 0}, {3, 1}, {2, 1}, {4, 1}, {5, 1}};
        CHECK_THROWS_AS((void)detect_transition(unsorted), std::invalid_argument);
    }
}

TEST_CASE("analyze_streak: exact decay recovers 1/|ln alpha|") {
    const double alpha = 0.95;
    const auto recs = synthetic_streak_records(300, 10, alpha);
    const ScriptedNews streak{300, std::vector<double>(10, -1.0)};
    const auto d = analyze_streak(recs, streak);
    CHECK(d.responded);
    CHECK(d.streak_end == 309);
    CHECK(d.peak_step == 310);
    REQUIRE(d.efold_time.has_value());
    CHECK(*d.efold_time == doctest::Approx(-1.0 / std::log(alpha)).epsilon(1e-9));
    CHECK(d.fit_r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scenario_streak: zero news streak gives no response") {
    auto p = small_params();
    const auto res = scenario_streak(p, {150, std::vector<double>(10, 0.0)});
    CHECK_FALSE(res.diagnostics.responded);
    CHECK(res.diagnostics.diagnostic == "no response");
}

TEST_CASE("scenario_streak: an empty streak reproduces run_single") {
    const auto p = small_params();
    const auto res = scenario_streak(p, {150, {}});
    CHECK(res.records == run_single(p).records);
}

TEST_CASE("streak_ensemble: mean aligned response of u") {
    ModelParams p;
    p.n_steps = 330;
    const ScriptedNews streak{210, std::vector<double>(10, -1.0)};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    const auto e = streak_ensemble(p, streak, seeds);
    REQUIRE(e.mean_aligned_u.size() == 330);
    CHECK(e.diagnostics.responded);
    CHECK(e.mean_aligned_u[219] > 0.0);
    CHECK(std::abs(e.diagnostics.peak_step - e.diagnostics.streak_end) <= 3);
}

TEST_CASE("price_excursion") {
    std::vector<StepRecord> recs;
    for (int t = 1; t <= 30; ++t) {
        StepRecord r;
        r.t = t;
        r.log_price = t < 10 ? 0.0 : (t < 15 ? -0.1 * (t - 9) : -0.3);
        recs.push_back(r);
    }
    const auto e = price_excursion(recs, {10, std::vector<double>(3, -1.0)}, 10);
    CHECK(e.max_abs == doctest::Approx(0.5));
    CHECK(e.at_horizon == doctest::Approx(0.3));
    CHECK_THROWS_AS((void)price_excursion(recs, {10, std::vector<double>(3, -1.0)}, 30), AnalyticsError);
}
