#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "mmflux/cli.hpp"
#include "mmflux/config.hpp"
#include "mmflux/errors.hpp"

using namespace mmflux;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mmflux_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int run(const std::string& cmd, const RunConfig& cfg, const fs::path& out, std::string* err_text = nullptr) {
    std::ostringstream log, err;
    const CommandContext ctx{out, &log, true};
    const int code = run_command(cmd, cfg, ctx, err);
    if (err_text) *err_text = err.str();
    return code;
}

RunConfig small_constant() {
    auto cfg = load_config(testing::config_path("constant_solution.json"));
    cfg.cells = {256};
    return cfg;
}

}  // namespace

TEST_CASE("every shipped config loads and round-trips") {
    for (const auto& entry : fs::directory_iterator(MMFLUX_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        const auto cfg = load_config(entry.path().string());
        nlohmann::json j = cfg;
        CHECK(parse_config(j) == cfg);
    }
}

TEST_CASE("config errors") {
    auto j = nlohmann::json::parse(slurp(testing::config_path("constant_solution.json")));
    auto bad = j;
    bad["problem"]["m"] = 0;
    const auto cfg = parse_config(bad);
    std::string err;
    CHECK(run("solve", cfg, fresh_dir("m0"), &err) == kExitConfig);
    CHECK(err.find("m must be") != std::string::npos);

    bad = j;
    bad["problem"]["source"] = {{"id", "quartic"}};
    std::string where;
    try {
        (void)run("solve", parse_config(bad), fresh_dir("src"), &where);
    } catch (const std::exception& e) {
        where = e.what();
    }
    CHECK(where.find("quartic") != std::string::npos);

    bad = j;
    bad["extra"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = j;
    bad["snapshots"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    CHECK_THROWS_AS(load_config(testing::config_path("missing.json")), ConfigError);
    CHECK(run("bogus", small_constant(), fresh_dir("bogus")) == kExitConfig);
}

TEST_CASE("solve writes snapshots") {
    const auto out = fresh_dir("solve");
    CHECK(run("solve", small_constant(), out) == kExitOk);
    const auto csv = slurp(out / "snapshots.csv");
    CHECK(csv.rfind("snapshot,level,t,x,u,v\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + 11 * 256);
    const auto meta = read_json(out / "run.json");
    CHECK(meta["snapshot_times"].size() == 11);
    CHECK(meta["snapshot_times"].back().get<double>() == 0.5);
}

TEST_CASE("verify on a constant solution exits 0") {
    const auto out = fresh_dir("verify_const");
    CHECK(run("verify", small_constant(), out) == kExitOk);
    const auto v = read_json(out / "verify.json");
    CHECK(v["holds"].get<bool>());
    const auto e = read_json(out / "entropy_256.json");
    CHECK(e["split_defect"].get<double>() <= 1e-12);
}

TEST_CASE("verify reports the anti-dissipative pair as a violation") {
    const auto cfg = load_config(testing::data_path("antidissipative.json"));
    const auto out = fresh_dir("verify_anti");
    CHECK(run("verify", cfg, out) == kExitViolation);
    const auto v = read_json(out / "verify.json");
    CHECK_FALSE(v["holds"].get<bool>());
}

TEST_CASE("parametrize without jumps gives U = s") {
    auto cfg = small_constant();
    cfg.param_samples = 11;
    const auto out = fresh_dir("param");
    CHECK(run("parametrize", cfg, out) == kExitOk);
    std::istringstream csv(slurp(out / "parametrization.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "s,U,calA");
    int rows = 0;
    while (std::getline(csv, line)) {
        double s = 0, u = 0;
        char comma = 0;
        std::istringstream row(line);
        row >> s >> comma >> u;
        CHECK(u == s);
        ++rows;
    }
    CHECK(rows == 11);
    CHECK(read_json(out / "parametrization.json")["plateaus"].empty());
}

TEST_CASE("ym with one member gives single atoms") {
    auto cfg = small_constant();
    cfg.j_schedule.clear();
    const auto out = fresh_dir("ym1");
    CHECK(run("ym", cfg, out) == kExitOk);
    const auto y = read_json(out / "ym.json");
    CHECK(y["members"].get<int>() == 1);
    CHECK(y["max_atoms"].get<int>() == 1);
    CHECK(y["weight_defect"].get<double>() == 0.0);
    CHECK(y["holds"].get<bool>());
}

TEST_CASE("converge reports an order and schedules") {
    auto cfg = small_constant();
    cfg.j_schedule = {256, 1024};
    cfg.m_schedule = {1, 2};
    const auto out = fresh_dir("conv");
    CHECK(run("converge", cfg, out) == kExitOk);
    const auto o = read_json(out / "order.json");
    CHECK(o.contains("order"));
    CHECK(fs::exists(out / "j_schedule.csv"));
    CHECK(fs::exists(out / "m_schedule.json"));
    CHECK(fs::exists(out / "converge.json"));
}

TEST_CASE("reruns are bit-identical") {
    auto cfg = load_config(testing::config_path("arctan_source.json"));
    cfg.cells = {256};
    const auto a = fresh_dir("rerun_a");
    const auto b = fresh_dir("rerun_b");
    REQUIRE(run("verify", cfg, a) == kExitOk);
    REQUIRE(run("verify", cfg, b) == kExitOk);
    for (const char* f : {"entropy_256.csv", "entropy_256.json", "pair_256.csv", "l1_256.csv", "verify.json"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("snapshot levels pick the first level at or after each target") {
    const std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    CHECK(snapshot_levels(times, 3) == std::vector<std::size_t>{0, 3, 5});
    CHECK(snapshot_levels(times, 2) == std::vector<std::size_t>{0, 5});
}
