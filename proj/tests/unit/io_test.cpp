#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "letomo/errors.hpp"
#include "letomo/io.hpp"

using namespace letomo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::path(testing::TempDir()) / ("letomo_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

std::string data_error(const std::function<void()>& f)
{
    try {
        f();
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Geo, CentreMapsToOrigin)
{
    const GeoFrame f{35.5, 139.2};
    const Point p = f.to_local(35.5, 139.2, 7.0);
    EXPECT_NEAR(p.x(), 0.0, 1e-12);
    EXPECT_NEAR(p.y(), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.z(), 7.0);
    const Point north = f.to_local(36.5, 139.2, 0.0);
    EXPECT_NEAR(north.y(), GeoFrame::kEarthRadius * std::numbers::pi / 180.0, 1e-9);
    const auto [lat, lon] = f.to_geographic(f.to_local(35.71, 138.93, 3.0));
    EXPECT_NEAR(lat, 35.71, 1e-9);
    EXPECT_NEAR(lon, 138.93, 1e-9);
}

TEST(Numbers, ShortestRoundTrip)
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 4.0, 123456.789})
        EXPECT_EQ(std::stod(format_number(v)), v) << format_number(v);
    EXPECT_EQ(format_number(4.0), "4");
}

TEST(Config, DefaultsAndRoundTrip)
{
    const ExperimentConfig d = parse_config(Json::object());
    EXPECT_EQ(d.grid.nz, 26);
    EXPECT_EQ(d.methods.size(), 1u);
    EXPECT_FALSE(d.synth);

    const Json j = Json::parse(R"({
        "synth": {"kind": "Checkerboard3D", "n_events": 50, "station_margin": 12.5},
        "methods": [{"kind": "Proposed", "lambda_ver": 0.1, "lambda_hor": 0.001, "eps_v": 0.001}],
        "solver": {"residual_balancing": true, "outer_iterations": 4},
        "inversion": {"damping": "iterate", "relocate": false},
        "cv": {"enabled": true, "first": [0.1, 0.5], "second": [0.001]},
        "seed": 9
    })");
    const ExperimentConfig c = parse_config(j);
    EXPECT_EQ(c.synth->scenario.kind, ScenarioKind::Checkerboard3D);
    EXPECT_EQ(c.synth->n_events, 50u);
    EXPECT_EQ(c.synth->station_margin, 12.5);
    EXPECT_EQ(c.methods[0].kind, PenaltyKind::Proposed);
    EXPECT_EQ(c.methods[0].eps_v, 0.001);
    EXPECT_TRUE(c.inversion.solver.residual_balancing);
    EXPECT_EQ(c.inversion.damping, InversionConfig::Damping::Iterate);
    EXPECT_EQ(c.cv.second, std::vector<double>{0.001});
    EXPECT_EQ(c.seed, 9u);

    const Json once = to_json(c);
    EXPECT_EQ(to_json(parse_config(once)), once);
    EXPECT_EQ(config_hash(parse_config(once)), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 16u);
    ExperimentConfig other = c;
    other.seed = 10;
    EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, RejectsUnknownKeysAndTypes)
{
    try {
        parse_config(Json::parse(R"({"solver": {"etta": 1.0}})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("etta"), std::string::npos);
    }
    EXPECT_THROW(parse_config(Json::parse(R"({"seed": "one"})")), ConfigError);
    EXPECT_THROW(parse_config(Json::parse(R"({"methods": [{"kind": "Ridge"}]})")), ConfigError);
    EXPECT_THROW(parse_config(Json::parse(R"({"methods": [{"kind": "L2Smooth", "lambda_ver": -1}]})")),
                 ConfigError);
    EXPECT_THROW(parse_config(Json::parse(R"({"synth": {}, "input": {"events": "e", "stations": "s",
                                             "arrivals": "a"}})")),
                 ConfigError);
}

TEST(Catalog, CartesianRoundTrip)
{
    const fs::path dir = scratch("roundtrip");
    Dataset d;
    d.events = {{"E0", Point(1.0 / 3.0, -2.25, 5.125), 0.75}, {"E1", Point(-7.5, 3.0, 12.0), -1.0 / 7.0}};
    d.stations = {{"S0", Point(0.1, 0.2, 0.3)}, {"S1", Point(-9.0, 9.0, 0.0)}};
    d.arrivals = {{0, 0, 3.0 + 1e-7, Split::Train}, {0, 1, 4.2, Split::Validation}, {1, 1, 1.0 / 9.0, Split::Train}};
    write_catalog(dir, d, Stamp{"abc", 3});
    const Dataset r = load_catalog(dir / "events.csv", dir / "stations.csv", dir / "arrivals.csv", GeoFrame{},
                                   paper_grid_shape(), 1);
    ASSERT_EQ(r.events.size(), 2u);
    ASSERT_EQ(r.arrivals.size(), 3u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_LT((r.events[i].position - d.events[i].position).norm(), 1e-9);
        EXPECT_NEAR(r.events[i].origin_time, d.events[i].origin_time, 1e-9);
        EXPECT_LT((r.stations[i].position - d.stations[i].position).norm(), 1e-9);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(r.arrivals[k].time, d.arrivals[k].time, 1e-9);
        EXPECT_EQ(r.arrivals[k].split, d.arrivals[k].split);
    }
    std::ifstream in(dir / "events.csv");
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("# config_hash=abc", 0), 0u);
}

TEST(Catalog, GeographicInputAndAutoSplit)
{
    const fs::path dir = scratch("geo");
    write_text(dir / "e.csv", "id,lat,lon,depth_km,origin_time_s\nA,35.0,139.0,10,0\nB,35.1,139.1,5,1\n");
    write_text(dir / "s.csv", "id,lat,lon,elev_m\nX,35.0,139.0,500\nY,35.05,139.05,-1500\n");
    write_text(dir / "a.csv", "event_id,station_id,t_obs_s\nA,X,2\nA,Y,3\nB,X,4\nB,Y,5\n");
    const Dataset d = load_catalog(dir / "e.csv", dir / "s.csv", dir / "a.csv", GeoFrame{35.0, 139.0},
                                   paper_grid_shape(), 4, 0.5);
    EXPECT_NEAR(d.events[0].position.norm() - 10.0, 0.0, 1e-12);
    // Above the grid top: lowered onto it.
    EXPECT_DOUBLE_EQ(d.stations[0].position.z(), 0.0);
    EXPECT_DOUBLE_EQ(d.stations[1].position.z(), 1.5);
    int val = 0;
    for (const auto& a : d.arrivals) val += a.split == Split::Validation;
    EXPECT_EQ(val, 2);
}

TEST(Catalog, ReportsEveryBadRow)
{
    const fs::path dir = scratch("bad");
    write_text(dir / "e.csv", "id,x_km,y_km,z_km,origin_time_s\nA,0,0,5,0\nB,1,1,nan,0\n");
    write_text(dir / "s.csv", "id,x_km,y_km,z_km\nX,0,0,0\n");
    write_text(dir / "a.csv", "event_id,station_id,t_obs_s\nA,X,2\nA,Q,3\nA,X,4\nA,X,oops\n");
    const std::string msg = data_error([&] {
        load_catalog(dir / "e.csv", dir / "s.csv", dir / "a.csv", GeoFrame{}, paper_grid_shape(), 1);
    });
    EXPECT_NE(msg.find("e.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("a.csv:3: unknown station 'Q'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("a.csv:4: duplicate"), std::string::npos) << msg;
    EXPECT_NE(msg.find("a.csv:5"), std::string::npos) << msg;
}

TEST(GridJson, RoundTripIsExact)
{
    GridShape s;
    s.nx = 3;
    s.ny = 2;
    s.nz = 4;
    s.dx = 1.5;
    s.origin = Point(-1.0, 2.0, 0.5);
    VelocityGrid g(s, 4.0);
    g.set(2, 1, 3, 4.0 + 1.0 / 3.0);
    g.set_outer({4.1, 4.2, 4.3, 4.4}, 5.1);
    const fs::path p = scratch("grid") / "g.json";
    write_json(p, grid_to_json(g, Stamp{"h", 2}));
    const VelocityGrid r = grid_from_json(read_json(p));
    EXPECT_EQ(r.interior(), g.interior());
    EXPECT_EQ(r.outer_ring(), g.outer_ring());
    EXPECT_EQ(r.outer_floor(), g.outer_floor());
    EXPECT_EQ(r.shape().origin, s.origin);
    EXPECT_THROW(grid_from_json(Json{{"shape", 1}}), DataError);
}

TEST(Profile, ReadsValuesAndRejectsBadLines)
{
    const fs::path dir = scratch("profile");
    write_text(dir / "p.txt", "4.0\n4.5\n5.0\n");
    EXPECT_EQ(read_profile(dir / "p.txt"), (std::vector<double>{4.0, 4.5, 5.0}));
    write_text(dir / "q.txt", "4.0\n-1\n");
    EXPECT_THROW(read_profile(dir / "q.txt"), DataError);
}

TEST(ErrorJson, Shape)
{
    const Json e = error_json("data", "bad row");
    EXPECT_EQ(e["error"]["kind"], "data");
    EXPECT_EQ(e["error"]["message"], "bad row");
}
