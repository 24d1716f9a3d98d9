#include "letomo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "letomo/errors.hpp"
#include "letomo/random.hpp"

namespace letomo {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 6;

// Strict view of a JSON object: every key must be consumed.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    Section child(const std::string& key) { return Section(raw(key), path_ + "." + key); }

    template <class T>
    void get(const std::string& key, T& out)
    {
        if (!has(key)) return;
        try {
            out = raw(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path_ + "." + key + " has the wrong type");
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
    }

    std::string where() const { return path_; }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

RegularizerSpec parse_method(Section s)
{
    RegularizerSpec r;
    std::string kind = to_string(r.kind);
    s.get("kind", kind);
    r.kind = parse_penalty_kind(kind);
    s.get("lambda_ver", r.lambda_ver);
    s.get("lambda_hor", r.lambda_hor);
    s.get("lambda_lap", r.lambda_lap);
    s.get("lambda_l1first", r.lambda_l1first);
    s.get("lambda_l1second", r.lambda_l1second);
    s.get("eps_v", r.eps_v);
    s.get("eps_h", r.eps_h);
    s.finish();
    r.validate();
    return r;
}

Json method_json(const RegularizerSpec& r)
{
    return Json{{"kind", to_string(r.kind)},
                {"lambda_ver", r.lambda_ver},
                {"lambda_hor", r.lambda_hor},
                {"lambda_lap", r.lambda_lap},
                {"lambda_l1first", r.lambda_l1first},
                {"lambda_l1second", r.lambda_l1second},
                {"eps_v", r.eps_v},
                {"eps_h", r.eps_h}};
}

std::string damping_name(InversionConfig::Damping d)
{
    return d == InversionConfig::Damping::Initial ? "initial" : "iterate";
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end && std::isfinite(out);
}

// Collects itemized problems and throws them together.
struct Problems {
    std::vector<std::string> items;

    void add(const fs::path& file, int line, const std::string& what)
    {
        items.push_back(file.filename().string() + ":" + std::to_string(line) + ": " + what);
    }

    void raise() const
    {
        if (items.empty()) return;
        std::string msg;
        for (const auto& i : items) msg += (msg.empty() ? "" : "\n") + i;
        throw DataError(msg);
    }
};

// Columns of a table given alternative layouts; empty when none matches.
std::vector<int> pick_columns(const CsvTable& t, const std::vector<std::string>& names)
{
    std::vector<int> out;
    for (const auto& n : names) {
        const int c = t.column(n);
        if (c < 0) return {};
        out.push_back(c);
    }
    return out;
}

} // namespace

Point GeoFrame::to_local(double lat, double lon, double depth_km) const
{
    constexpr double deg = std::numbers::pi / 180.0;
    const double x = kEarthRadius * (lon - lon0) * deg * std::cos(lat0 * deg);
    const double y = kEarthRadius * (lat - lat0) * deg;
    return Point(x, y, depth_km);
}

std::pair<double, double> GeoFrame::to_geographic(const Point& p) const
{
    constexpr double deg = std::numbers::pi / 180.0;
    const double lat = lat0 + p.y() / (kEarthRadius * deg);
    const double lon = lon0 + p.x() / (kEarthRadius * deg * std::cos(lat0 * deg));
    return {lat, lon};
}

GeoFrame ExperimentConfig::frame() const
{
    return GeoFrame{center_lat, center_lon};
}

ExperimentConfig parse_config(const Json& j)
{
    ExperimentConfig c;
    Section root(j, "config");
    if (root.has("grid")) {
        Section g = root.child("grid");
        GridShape& s = c.grid;
        g.get("nx", s.nx);
        g.get("ny", s.ny);
        g.get("nz", s.nz);
        g.get("dx", s.dx);
        g.get("dy", s.dy);
        g.get("dz", s.dz);
        if (g.has("origin")) {
            std::vector<double> o;
            g.get("origin", o);
            if (o.size() != 3) throw ConfigError("config.grid.origin needs three values");
            s.origin = Point(o[0], o[1], o[2]);
        }
        g.get("outer_offset", s.outer_offset);
        g.get("outer_depth", s.outer_depth);
        g.get("center_lat", c.center_lat);
        g.get("center_lon", c.center_lon);
        g.finish();
        try {
            s.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("config.grid: ") + e.what());
        }
    }
    if (root.has("synth")) {
        Section s = root.child("synth");
        SynthConfig sc;
        std::string kind = to_string(sc.scenario.kind);
        s.get("kind", kind);
        sc.scenario.kind = parse_scenario_kind(kind);
        s.get("base_velocity", sc.scenario.base_velocity);
        s.get("jump", sc.scenario.jump);
        s.get("jump_layer", sc.scenario.jump_layer);
        s.get("amplitude", sc.scenario.amplitude);
        s.get("phase", sc.scenario.phase);
        s.get("noise_sigma", sc.scenario.noise_sigma);
        s.get("block_velocity", sc.scenario.block_velocity);
        s.get("block", sc.scenario.block);
        s.get("n_events", sc.n_events);
        s.get("n_stations", sc.n_stations);
        s.get("n_arrivals", sc.n_arrivals);
        s.get("south_bias", sc.south_bias);
        s.get("station_margin", sc.station_margin);
        s.get("validation_fraction", sc.validation_fraction);
        s.finish();
        sc.scenario.validate();
        if (!(sc.validation_fraction >= 0.0 && sc.validation_fraction < 1.0))
            throw ConfigError("config.synth.validation_fraction must lie in [0, 1)");
        if (!(sc.station_margin >= 0.0)) throw ConfigError("config.synth.station_margin must be nonnegative");
        c.synth = sc;
    }
    if (root.has("input")) {
        Section s = root.child("input");
        InputConfig in;
        s.get("events", in.events);
        s.get("stations", in.stations);
        s.get("arrivals", in.arrivals);
        s.get("outer_profile", in.outer_profile);
        s.finish();
        if (in.events.empty() || in.stations.empty() || in.arrivals.empty())
            throw ConfigError("config.input needs events, stations and arrivals paths");
        c.input = in;
    }
    if (c.synth && c.input) throw ConfigError("config has both synth and input; choose one");
    root.get("initial_velocity", c.initial_velocity);
    if (!(c.initial_velocity > 0.0)) throw ConfigError("config.initial_velocity must be positive");
    if (root.has("methods")) {
        const Json& m = root.raw("methods");
        if (!m.is_array() || m.empty()) throw ConfigError("config.methods must be a nonempty array");
        c.methods.clear();
        for (std::size_t i = 0; i < m.size(); ++i)
            c.methods.push_back(parse_method(Section(m[i], "config.methods[" + std::to_string(i) + "]")));
    }
    if (root.has("solver")) {
        Section s = root.child("solver");
        SolverConfig& sv = c.inversion.solver;
        s.get("eta", sv.eta);
        s.get("max_admm_iterations", sv.max_admm_iterations);
        s.get("primal_tol", sv.primal_tol);
        s.get("dual_tol", sv.dual_tol);
        s.get("residual_balancing", sv.residual_balancing);
        s.get("outer_iterations", sv.outer_iterations);
        s.get("lm_mu0", sv.lm.mu0);
        s.get("lm_factor", sv.lm.factor);
        s.get("lm_max_iterations", sv.lm.max_iterations);
        s.get("lm_gradient_tol", sv.lm.gradient_tol);
        s.get("lm_step_tol", sv.lm.step_tol);
        s.finish();
        sv.validate();
    }
    if (root.has("inversion")) {
        Section s = root.child("inversion");
        InversionConfig& iv = c.inversion;
        s.get("star_order", iv.star_order);
        s.get("min_velocity", iv.min_velocity);
        s.get("step_cells", iv.step_cells);
        s.get("relocate", iv.relocate);
        std::string damping = damping_name(iv.damping);
        s.get("damping", damping);
        if (damping == "initial")
            iv.damping = InversionConfig::Damping::Initial;
        else if (damping == "iterate")
            iv.damping = InversionConfig::Damping::Iterate;
        else
            throw ConfigError("config.inversion.damping must be \"initial\" or \"iterate\"");
        s.get("relocation_iterations", iv.relocation.max_iterations);
        s.get("relocation_step_cells", iv.relocation.step_cells);
        s.finish();
        if (iv.star_order < 1) throw ConfigError("config.inversion.star_order must be at least 1");
        if (!(iv.min_velocity > 0.0)) throw ConfigError("config.inversion.min_velocity must be positive");
        if (!(iv.step_cells > 0.0)) throw ConfigError("config.inversion.step_cells must be positive");
    }
    if (root.has("cv")) {
        Section s = root.child("cv");
        s.get("enabled", c.cv.enabled);
        s.get("first", c.cv.first);
        s.get("second", c.cv.second);
        s.finish();
        for (double v : c.cv.first)
            if (!(v >= 0.0)) throw ConfigError("config.cv.first holds a negative candidate");
        for (double v : c.cv.second)
            if (!(v >= 0.0)) throw ConfigError("config.cv.second holds a negative candidate");
    }
    root.get("seed", c.seed);
    root.finish();
    c.inversion.spec = c.methods.front();
    return c;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

Json to_json(const ExperimentConfig& c)
{
    const GridShape& g = c.grid;
    Json j;
    j["grid"] = {{"nx", g.nx},
                 {"ny", g.ny},
                 {"nz", g.nz},
                 {"dx", g.dx},
                 {"dy", g.dy},
                 {"dz", g.dz},
                 {"origin", {g.origin.x(), g.origin.y(), g.origin.z()}},
                 {"outer_offset", g.outer_offset},
                 {"outer_depth", g.outer_depth},
                 {"center_lat", c.center_lat},
                 {"center_lon", c.center_lon}};
    if (c.synth) {
        const SynthConfig& s = *c.synth;
        j["synth"] = {{"kind", to_string(s.scenario.kind)},
                      {"base_velocity", s.scenario.base_velocity},
                      {"jump", s.scenario.jump},
                      {"jump_layer", s.scenario.jump_layer},
                      {"amplitude", s.scenario.amplitude},
                      {"phase", s.scenario.phase},
                      {"noise_sigma", s.scenario.noise_sigma},
                      {"block_velocity", s.scenario.block_velocity},
                      {"block", s.scenario.block},
                      {"n_events", s.n_events},
                      {"n_stations", s.n_stations},
                      {"n_arrivals", s.n_arrivals},
                      {"south_bias", s.south_bias},
                      {"station_margin", s.station_margin},
                      {"validation_fraction", s.validation_fraction}};
    }
    if (c.input)
        j["input"] = {{"events", c.input->events},
                      {"stations", c.input->stations},
                      {"arrivals", c.input->arrivals},
                      {"outer_profile", c.input->outer_profile}};
    j["initial_velocity"] = c.initial_velocity;
    j["methods"] = Json::array();
    for (const auto& m : c.methods) j["methods"].push_back(method_json(m));
    const SolverConfig& sv = c.inversion.solver;
    j["solver"] = {{"eta", sv.eta},
                   {"max_admm_iterations", sv.max_admm_iterations},
                   {"primal_tol", sv.primal_tol},
                   {"dual_tol", sv.dual_tol},
                   {"residual_balancing", sv.residual_balancing},
                   {"outer_iterations", sv.outer_iterations},
                   {"lm_mu0", sv.lm.mu0},
                   {"lm_factor", sv.lm.factor},
                   {"lm_max_iterations", sv.lm.max_iterations},
                   {"lm_gradient_tol", sv.lm.gradient_tol},
                   {"lm_step_tol", sv.lm.step_tol}};
    const InversionConfig& iv = c.inversion;
    j["inversion"] = {{"star_order", iv.star_order},
                      {"min_velocity", iv.min_velocity},
                      {"step_cells", iv.step_cells},
                      {"relocate", iv.relocate},
                      {"damping", damping_name(iv.damping)},
                      {"relocation_iterations", iv.relocation.max_iterations},
                      {"relocation_step_cells", iv.relocation.step_cells}};
    j["cv"] = {{"enabled", c.cv.enabled}, {"first", c.cv.first}, {"second", c.cv.second}};
    j["seed"] = c.seed;
    return j;
}

std::string config_hash(const ExperimentConfig& c)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Stamp stamp_of(const ExperimentConfig& c)
{
    return Stamp{config_hash(c), c.seed};
}

std::string format_number(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

int CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split_line(s);
            continue;
        }
        t.rows.push_back(split_line(s));
        t.lines.push_back(number);
    }
    if (t.header.empty()) throw DataError(path.filename().string() + ": missing header");
    return t;
}

void write_csv(const fs::path& path, const Stamp& stamp, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << "# config_hash=" << stamp.hash << ", seed=" << stamp.seed << "\n";
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
}

Dataset load_catalog(const fs::path& events_path, const fs::path& stations_path, const fs::path& arrivals_path,
                     const GeoFrame& frame, const GridShape& grid, std::uint64_t seed, double validation_fraction)
{
    Problems bad;
    Dataset d;

    const CsvTable ev = read_csv(events_path);
    std::map<std::string, std::size_t> event_index;
    {
        std::vector<int> cols = pick_columns(ev, {"id", "lat", "lon", "depth_km", "origin_time_s"});
        const bool geo = !cols.empty();
        if (!geo) cols = pick_columns(ev, {"id", "x_km", "y_km", "z_km", "origin_time_s"});
        if (cols.empty())
            bad.add(events_path, 1, "header needs id, lat, lon, depth_km, origin_time_s or id, x_km, y_km, z_km, "
                                    "origin_time_s");
        else
            for (std::size_t r = 0; r < ev.rows.size(); ++r) {
                const auto& row = ev.rows[r];
                const int line = ev.lines[r];
                if (row.size() != ev.header.size()) {
                    bad.add(events_path, line, "expected " + std::to_string(ev.header.size()) + " fields");
                    continue;
                }
                double a, b, z, t;
                if (!parse_double(row[cols[1]], a) || !parse_double(row[cols[2]], b) ||
                    !parse_double(row[cols[3]], z) || !parse_double(row[cols[4]], t)) {
                    bad.add(events_path, line, "non-finite or malformed number");
                    continue;
                }
                const std::string& id = row[cols[0]];
                if (id.empty() || event_index.count(id)) {
                    bad.add(events_path, line, "empty or duplicate event id '" + id + "'");
                    continue;
                }
                event_index[id] = d.events.size();
                d.events.push_back({id, geo ? frame.to_local(a, b, z) : Point(a, b, z), t});
            }
    }

    const CsvTable st = read_csv(stations_path);
    std::map<std::string, std::size_t> station_index;
    {
        std::vector<int> cols = pick_columns(st, {"id", "lat", "lon", "elev_m"});
        const bool geo = !cols.empty();
        if (!geo) cols = pick_columns(st, {"id", "x_km", "y_km", "z_km"});
        const double top = grid.origin.z();
        if (cols.empty())
            bad.add(stations_path, 1, "header needs id, lat, lon, elev_m or id, x_km, y_km, z_km");
        else
            for (std::size_t r = 0; r < st.rows.size(); ++r) {
                const auto& row = st.rows[r];
                const int line = st.lines[r];
                if (row.size() != st.header.size()) {
                    bad.add(stations_path, line, "expected " + std::to_string(st.header.size()) + " fields");
                    continue;
                }
                double a, b, c;
                if (!parse_double(row[cols[1]], a) || !parse_double(row[cols[2]], b) ||
                    !parse_double(row[cols[3]], c)) {
                    bad.add(stations_path, line, "non-finite or malformed number");
                    continue;
                }
                const std::string& id = row[cols[0]];
                if (id.empty() || station_index.count(id)) {
                    bad.add(stations_path, line, "empty or duplicate station id '" + id + "'");
                    continue;
                }
                Point p = geo ? frame.to_local(a, b, -c / 1000.0) : Point(a, b, c);
                p.z() = std::max(p.z(), top);
                station_index[id] = d.stations.size();
                d.stations.push_back({id, p});
            }
    }

    const CsvTable ar = read_csv(arrivals_path);
    const std::vector<int> cols = pick_columns(ar, {"event_id", "station_id", "t_obs_s"});
    const int split_col = ar.column("split");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    if (cols.empty()) bad.add(arrivals_path, 1, "header needs event_id, station_id, t_obs_s[, split]");
    else
        for (std::size_t r = 0; r < ar.rows.size(); ++r) {
            const auto& row = ar.rows[r];
            const int line = ar.lines[r];
            if (row.size() != ar.header.size()) {
                bad.add(arrivals_path, line, "expected " + std::to_string(ar.header.size()) + " fields");
                continue;
            }
            const auto e = event_index.find(row[cols[0]]);
            const auto s = station_index.find(row[cols[1]]);
            if (e == event_index.end()) bad.add(arrivals_path, line, "unknown event '" + row[cols[0]] + "'");
            if (s == station_index.end()) bad.add(arrivals_path, line, "unknown station '" + row[cols[1]] + "'");
            double t;
            if (!parse_double(row[cols[2]], t)) {
                bad.add(arrivals_path, line, "non-finite or malformed arrival time");
                continue;
            }
            if (e == event_index.end() || s == station_index.end()) continue;
            if (!seen.insert({e->second, s->second}).second) {
                bad.add(arrivals_path, line, "duplicate pair (" + row[cols[0]] + ", " + row[cols[1]] + ")");
                continue;
            }
            Split split = Split::Train;
            if (split_col >= 0) {
                const std::string& v = row[split_col];
                if (v == "validation")
                    split = Split::Validation;
                else if (v != "train")
                    bad.add(arrivals_path, line, "split must be 'train' or 'validation'");
            }
            d.arrivals.push_back({e->second, s->second, t, split});
        }
    bad.raise();

    if (split_col < 0) {
        const auto n = d.arrivals.size();
        const auto n_val = static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(n)));
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        const CounterRng rng(seed, kSplitStream);
        for (std::size_t i = n; i > 1; --i) {
            const auto j = std::min(static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(i)), i - 1);
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t k = 0; k < n_val; ++k) d.arrivals[idx[k]].split = Split::Validation;
    }
    d.validate();
    return d;
}

void write_catalog(const fs::path& dir, const Dataset& data, const Stamp& stamp)
{
    std::vector<std::vector<std::string>> rows;
    for (const Event& e : data.events)
        rows.push_back({e.id, format_number(e.position.x()), format_number(e.position.y()),
                        format_number(e.position.z()), format_number(e.origin_time)});
    write_csv(dir / "events.csv", stamp, {"id", "x_km", "y_km", "z_km", "origin_time_s"}, rows);
    rows.clear();
    for (const Station& s : data.stations)
        rows.push_back({s.id, format_number(s.position.x()), format_number(s.position.y()),
                        format_number(s.position.z())});
    write_csv(dir / "stations.csv", stamp, {"id", "x_km", "y_km", "z_km"}, rows);
    rows.clear();
    for (const Arrival& a : data.arrivals)
        rows.push_back({data.events.at(a.event).id, data.stations.at(a.station).id, format_number(a.time),
                        a.split == Split::Train ? "train" : "validation"});
    write_csv(dir / "arrivals.csv", stamp, {"event_id", "station_id", "t_obs_s", "split"}, rows);
}

Json grid_to_json(const VelocityGrid& grid, const Stamp& stamp)
{
    const GridShape& s = grid.shape();
    const Eigen::VectorXd v = grid.interior();
    return Json{{"config_hash", stamp.hash},
                {"seed", stamp.seed},
                {"shape",
                 {{"nx", s.nx},
                  {"ny", s.ny},
                  {"nz", s.nz},
                  {"dx", s.dx},
                  {"dy", s.dy},
                  {"dz", s.dz},
                  {"origin", {s.origin.x(), s.origin.y(), s.origin.z()}},
                  {"outer_offset", s.outer_offset},
                  {"outer_depth", s.outer_depth}}},
                {"values", std::vector<double>(v.data(), v.data() + v.size())},
                {"outer_ring", grid.outer_ring()},
                {"outer_floor", grid.outer_floor()}};
}

VelocityGrid grid_from_json(const Json& j)
{
    try {
        const Json& s = j.at("shape");
        GridShape shape;
        shape.nx = s.at("nx");
        shape.ny = s.at("ny");
        shape.nz = s.at("nz");
        shape.dx = s.at("dx");
        shape.dy = s.at("dy");
        shape.dz = s.at("dz");
        const std::vector<double> o = s.at("origin");
        if (o.size() != 3) throw DataError("grid origin needs three values");
        shape.origin = Point(o[0], o[1], o[2]);
        shape.outer_offset = s.at("outer_offset");
        shape.outer_depth = s.at("outer_depth");
        shape.validate();
        VelocityGrid g(shape, 1.0);
        const std::vector<double> values = j.at("values");
        if (values.size() != g.parameter_count()) throw DataError("grid values do not match its shape");
        g.set_interior(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
        g.set_outer(j.at("outer_ring").get<std::vector<double>>(), j.at("outer_floor").get<double>());
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed grid JSON: ") + e.what());
    }
}

void write_json(const fs::path& path, const Json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

Json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + " is not valid JSON: " + e.what());
    }
}

std::vector<double> read_profile(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        double v;
        if (!parse_double(s, v) || !(v > 0.0))
            throw DataError(path.filename().string() + ":" + std::to_string(number) + ": bad velocity");
        out.push_back(v);
    }
    return out;
}

Json error_json(const std::string& kind, const std::string& message)
{
    return Json{{"error", {{"kind", kind}, {"message", message}}}};
}

} // namespace letomo
