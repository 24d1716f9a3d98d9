#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "letomo/cli.hpp"
#include "letomo/io.hpp"

using namespace letomo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::path(testing::TempDir()) / ("letomo_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path small_config(const fs::path& dir, const std::string& methods)
{
    const fs::path p = dir / "config.in.json";
    std::ofstream(p) << R"({
        "grid": {"nx": 4, "ny": 4, "nz": 8, "dx": 4, "dy": 4, "dz": 1, "origin": [-6, -6, 0],
                 "outer_offset": 20, "outer_depth": 30},
        "synth": {"kind": "VelocityJump", "jump_layer": 4, "n_events": 25, "n_stations": 12,
                  "n_arrivals": 250, "noise_sigma": 0.05, "station_margin": 4},
        "methods": )" << methods
                     << R"(,
        "solver": {"outer_iterations": 2, "max_admm_iterations": 60},
        "inversion": {"relocate": false},
        "seed": 5
    })";
    return p;
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(const std::vector<std::string>& args)
{
    std::ostringstream o, e;
    const int code = run_command(args, o, e);
    return {code, o.str(), e.str()};
}

} // namespace

TEST(Cli, SynthIsByteIdenticalAcrossRuns)
{
    const fs::path dir = scratch("synth");
    const fs::path cfg = small_config(dir, R"([{"kind": "DLS"}])");
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "b").string()}).code, 0);
    for (const char* f : {"events.csv", "stations.csv", "arrivals.csv", "truth_grid.json", "initial_grid.json",
                          "truth_profile.csv", "config.json"}) {
        ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const std::string hash = config_hash(load_config(cfg));
    EXPECT_NE(slurp(dir / "a" / "arrivals.csv").find("config_hash=" + hash), std::string::npos);
}

TEST(Cli, ErrorsAreJsonWithNonzeroExit)
{
    const fs::path dir = scratch("errors");
    const Outcome missing = run({"synth", "--config", (dir / "nope.json").string(), "--out", (dir / "o").string()});
    EXPECT_NE(missing.code, 0);
    const Json e = Json::parse(missing.err);
    EXPECT_TRUE(e["error"].contains("kind"));
    EXPECT_TRUE(e["error"].contains("message"));

    std::ofstream(dir / "bad.json") << R"({"solver": {"bogus": 1}})";
    const Outcome bad = run({"synth", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(bad.code, 2);
    EXPECT_EQ(Json::parse(bad.err)["error"]["kind"], "config");

    const Outcome usage = run({"frobnicate"});
    EXPECT_EQ(usage.code, 2);
    EXPECT_EQ(Json::parse(usage.err)["error"]["kind"], "usage");
}

TEST(Cli, ProposedWithZeroWeightsMatchesDls)
{
    const fs::path dir = scratch("zero");
    const fs::path cfg = small_config(
        dir, R"([{"kind": "Proposed", "lambda_ver": 0, "lambda_hor": 0}, {"kind": "DLS"}])");
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "data").string()}).code, 0);
    for (const char* m : {"Proposed", "DLS"}) {
        const Outcome r = run({"invert", "--config", cfg.string(), "--data", (dir / "data").string(), "--method", m,
                           "--out", (dir / m).string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    const VelocityGrid p = grid_from_json(read_json(dir / "Proposed" / "grid.json"));
    const VelocityGrid d = grid_from_json(read_json(dir / "DLS" / "grid.json"));
    EXPECT_LT((p.interior() - d.interior()).cwiseAbs().maxCoeff(), 1e-3);
    for (const char* f : {"profile.csv", "slices.csv", "events_estimated.csv", "outer_log.csv", "admm_log.csv",
                          "metrics.json"})
        EXPECT_TRUE(fs::exists(dir / "DLS" / f)) << f;
    const Json metrics = read_json(dir / "DLS" / "metrics.json");
    EXPECT_TRUE(metrics.contains("mae"));
    EXPECT_EQ(metrics["method"], "DLS");
}

TEST(Cli, ExportAndRelocate)
{
    const fs::path dir = scratch("export");
    const fs::path cfg = small_config(dir, R"([{"kind": "DLS"}])");
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (dir / "data").string()}).code, 0);
    const Outcome ex = run({"export", "--grid", (dir / "data" / "truth_grid.json").string(), "--truth",
                        (dir / "data" / "truth_grid.json").string(), "--out", (dir / "ex").string()});
    ASSERT_EQ(ex.code, 0) << ex.err;
    const CsvTable prof = read_csv(dir / "ex" / "profile.csv");
    EXPECT_EQ(prof.rows.size(), 8u);
    const Outcome rel = run({"relocate", "--config", cfg.string(), "--data", (dir / "data").string(), "--grid",
                         (dir / "data" / "truth_grid.json").string(), "--out", (dir / "rel").string()});
    ASSERT_EQ(rel.code, 0) << rel.err;
    EXPECT_EQ(read_csv(dir / "rel" / "relocation.csv").rows.size(), 25u);
    EXPECT_TRUE(fs::exists(dir / "rel" / "relocation_summary.json"));
}
