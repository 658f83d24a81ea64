#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amkt/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using amkt::read_file;
using amkt::write_file_atomic;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("amkt_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(AMKT_CLI_PATH) + " " + args + " > " + (work_dir() / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path config(const std::string& name, const std::string& body) {
    const auto p = work_dir() / name;
    write_file_atomic(p, body);
    return p;
}

const char* small_model = R"("model": {"n_agents": 100, "n_steps": 400, "burn_in": 50})";

}  // namespace

TEST_CASE("cli: help and usage errors") {
    CHECK(run("--help") == 0);
    CHECK(run("") == 2);
    CHECK(run("simulate --no-such-flag") == 2);
    CHECK(run("analyze") == 2);
}

TEST_CASE("cli: configuration errors exit with 2") {
    const auto bad = config("bad.json", R"({"model": {"alpha": 1.2}})");
    CHECK(run("simulate --config " + bad.string()) == 2);
    CHECK(read_file(work_dir() / "last.log").find("model.alpha") != std::string::npos);
    CHECK(run("simulate --config " + (work_dir() / "nope.json").string()) == 2);
    const auto unknown = config("unknown.json", R"({"modle": {}})");
    CHECK(run("simulate --config " + unknown.string()) == 2);
    const auto no_sweep = config("nosweep.json", std::string("{") + small_model + "}");
    CHECK(run("sweep --config " + no_sweep.string()) == 2);
}

TEST_CASE("cli: simulate is byte-reproducible and analyze recomputes the same stats") {
    const auto cfg = config("sim.json", std::string("{") + small_model + "}");
    const auto a = work_dir() / "sim_a";
    const auto b = work_dir() / "sim_b";
    const auto c = work_dir() / "sim_c";
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + a.string()) == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + b.string()) == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + c.string() + " --seed 9") == 0);
    for (const char* f : {"timeseries.csv", "stats.csv", "agents.csv"}) {
        CHECK(read_file(a / f) == read_file(b / f));
    }
    CHECK(read_file(a / "timeseries.csv") != read_file(c / "timeseries.csv"));

    const auto an = work_dir() / "an";
    REQUIRE(run("analyze --config " + cfg.string() + " --input " + (a / "timeseries.csv").string() + " --out " +
                an.string()) == 0);
    CHECK(read_file(an / "stats.csv") == read_file(a / "stats.csv"));

    CHECK(run("analyze --input " + (work_dir() / "missing.csv").string() + " --out " + an.string()) == 3);
}

TEST_CASE("cli: --steps overrides the config") {
    const auto cfg = config("steps.json", std::string("{") + small_model + "}");
    const auto out = work_dir() / "steps";
    REQUIRE(run("simulate --config " + cfg.string() + " --steps 120 --out " + out.string()) == 0);
    const auto text = read_file(out / "timeseries.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 121);
}

TEST_CASE("cli: scenario writes streak diagnostics") {
    const auto cfg = config("scen.json", std::string("{") + small_model +
                                             R"(, "news": {"kind": "scripted", "entries": [{"start_step": 150, "values": [-1,-1,-1,-1,-1,-1,-1,-1,-1,-1]}]}})");
    const auto out = work_dir() / "scen";
    REQUIRE(run("scenario --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "timeseries.csv"));
    CHECK(read_file(out / "streak.csv").find("peak_step") != std::string::npos);
    const auto gaussian = config("gauss.json", std::string("{") + small_model + "}");
    CHECK(run("scenario --config " + gaussian.string() + " --out " + out.string()) == 2);
}

TEST_CASE("cli: sweep writes the sweep table and resumes from its journal") {
    const auto cfg = config("sweep.json", std::string("{") + small_model +
                                              R"(, "sweep": {"axis1": {"parameter": "c1_max", "values": [0, 1, 2, 3, 4, 5]}, "n_realizations": 2}})");
    const auto out = work_dir() / "sweep";
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out.string() + " --workers 2") == 0);
    const auto first = read_file(out / "sweep.csv");
    CHECK(first.find("axis1_name,axis1_value") == 0);
    CHECK(fs::exists(out / "transition.csv"));
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(read_file(out / "sweep.csv") == first);
    const auto journal = read_file(out / "sweep_journal.csv");
    CHECK(std::count(journal.begin(), journal.end(), '\n') == 13);
}
