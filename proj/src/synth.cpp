#include "letomo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "letomo/errors.hpp"
#include "letomo/inversion.hpp"
#include "letomo/random.hpp"

namespace letomo {

namespace {

// Independent random streams per purpose.
enum Stream : std::uint64_t { kStationPick = 1, kStationJitter, kEventPosition, kPairs, kNoise, kSplit };

double jump_profile(double base, double jump, int jump_layer, int z)
{
    if (z < jump_layer) return base;
    if (z == jump_layer) return base + 0.5 * jump;
    return base + jump;
}

double multilayer_profile(double base, double jump, int z)
{
    double v = base;
    for (int edge : {6, 13, 20}) {
        if (z == edge)
            v += 0.25 * jump;
        else if (z > edge)
            v += 0.5 * jump;
    }
    return v;
}

int dipping_layer(int x, int nx)
{
    return static_cast<int>(std::lround(8.0 + 6.0 * x / std::max(1, nx - 1)));
}

// First k entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> shuffled(std::size_t n, const CounterRng& rng)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(i));
        std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    return idx;
}

} // namespace

std::string to_string(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::VelocityJump: return "VelocityJump";
    case ScenarioKind::Checkerboard3D: return "Checkerboard3D";
    case ScenarioKind::DippingInterface: return "DippingInterface";
    case ScenarioKind::MultiLayer: return "MultiLayer";
    case ScenarioKind::HighVelocityZone: return "HighVelocityZone";
    case ScenarioKind::Homogeneous: return "Homogeneous";
    }
    return "?";
}

ScenarioKind parse_scenario_kind(const std::string& name)
{
    for (auto k : {ScenarioKind::VelocityJump, ScenarioKind::Checkerboard3D, ScenarioKind::DippingInterface,
                   ScenarioKind::MultiLayer, ScenarioKind::HighVelocityZone, ScenarioKind::Homogeneous})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown scenario kind '" + name + "'");
}

void Scenario::validate() const
{
    if (!(amplitude >= 0.0 && amplitude <= 0.2)) throw ConfigError("amplitude must lie in [0, 0.2]");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be nonnegative");
    if (!(base_velocity > 0.0) || !(base_velocity + jump > 0.0) || !(block_velocity > 0.0))
        throw ConfigError("scenario velocities must be positive");
}

GridShape paper_grid_shape()
{
    GridShape s;
    s.nx = 6;
    s.ny = 6;
    s.nz = 26;
    s.dx = 8.0;
    s.dy = 8.0;
    s.dz = 1.0;
    s.origin = Point(-20.0, -20.0, 0.0);
    return s;
}

std::vector<double> baseline_profile(const Scenario& sc, int nz)
{
    std::vector<double> p(nz);
    for (int z = 0; z < nz; ++z) {
        switch (sc.kind) {
        case ScenarioKind::VelocityJump: p[z] = jump_profile(sc.base_velocity, sc.jump, sc.jump_layer, z); break;
        case ScenarioKind::DippingInterface: p[z] = jump_profile(sc.base_velocity, sc.jump, 8, z); break;
        case ScenarioKind::MultiLayer: p[z] = multilayer_profile(sc.base_velocity, sc.jump, z); break;
        default: p[z] = sc.base_velocity;
        }
    }
    return p;
}

VelocityGrid make_true_model(const Scenario& sc, const GridShape& shape)
{
    sc.validate();
    const std::vector<double> base = baseline_profile(sc, shape.nz);
    VelocityGrid g(shape, base[0]);
    const double flip = sc.phase ? -1.0 : 1.0;
    for (int z = 0; z < shape.nz; ++z)
        for (int x = 0; x < shape.nx; ++x)
            for (int y = 0; y < shape.ny; ++y) {
                const double checker = flip * (((x + y) % 2 == 0) ? 1.0 : -1.0);
                double v = base[z];
                switch (sc.kind) {
                case ScenarioKind::VelocityJump: v = base[z] * (1.0 + sc.amplitude * checker); break;
                case ScenarioKind::Checkerboard3D:
                    v = sc.base_velocity * (1.0 + sc.amplitude * checker * ((z / 4) % 2 == 0 ? 1.0 : -1.0));
                    break;
                case ScenarioKind::DippingInterface:
                    v = jump_profile(sc.base_velocity, sc.jump, dipping_layer(x, shape.nx), z) *
                        (1.0 + sc.amplitude * checker);
                    break;
                case ScenarioKind::HighVelocityZone: {
                    const auto& b = sc.block;
                    const bool inside = x >= b[0] && x <= b[1] && y >= b[2] && y <= b[3] && z >= b[4] && z <= b[5];
                    v = inside ? sc.block_velocity : sc.base_velocity;
                    break;
                }
                case ScenarioKind::MultiLayer:
                case ScenarioKind::Homogeneous: break;
                }
                g.set(x, y, z, v);
            }
    g.set_outer(base, base.back());
    return g;
}

VelocityGrid make_initial_model(const Scenario& sc, const GridShape& shape, double velocity)
{
    const std::vector<double> base = baseline_profile(sc, shape.nz);
    VelocityGrid g(shape, velocity);
    g.set_outer(base, base.back());
    return g;
}

Catalog make_catalog(const GridShape& shape, std::size_t n_events, std::size_t n_stations, std::uint64_t seed,
                     bool south_bias, double station_margin)
{
    if (n_events < 1 || n_stations < 1) throw UsageError("catalog needs at least one event and one station");
    if (!(station_margin >= 0.0)) throw UsageError("station margin must be nonnegative");
    shape.validate();
    const double x0 = shape.origin.x(), y0 = shape.origin.y();
    const double lx = (shape.nx - 1) * shape.dx, ly = (shape.ny - 1) * shape.dy;
    const double top = shape.origin.z(), bottom = shape.origin.z() + (shape.nz - 1) * shape.dz;
    Catalog c;

    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_stations))));
    const std::vector<std::size_t> cells = shuffled(k * k, CounterRng(seed, kStationPick));
    const CounterRng jitter(seed, kStationJitter);
    for (std::size_t s = 0; s < n_stations; ++s) {
        const std::size_t cell = cells[s];
        const double fx = (static_cast<double>(cell % k) + 0.5 + 0.6 * (jitter.uniform(3 * s) - 0.5)) / k;
        const double fy = (static_cast<double>(cell / k) + 0.5 + 0.6 * (jitter.uniform(3 * s + 1) - 0.5)) / k;
        const double depth = std::max(top, 0.0) + 0.5 * jitter.uniform(3 * s + 2);
        std::ostringstream id;
        id << "S" << s;
        const double m = station_margin;
        c.stations.push_back(
            {id.str(), Point(x0 - m + fx * (lx + 2 * m), y0 - m + fy * (ly + 2 * m), std::min(depth, bottom))});
    }

    const CounterRng pos(seed, kEventPosition);
    const double zmin = std::min(bottom, std::max(top, 0.0) + 1.0);
    const double zmax = std::max(zmin, bottom - 1.0);
    std::uint64_t counter = 0;
    while (c.events.size() < n_events) {
        const double ux = pos.uniform(counter++), uy = pos.uniform(counter++), uz = pos.uniform(counter++);
        const double accept = pos.uniform(counter++);
        if (south_bias && uy < 0.5 && accept < 0.75) continue;
        std::ostringstream id;
        id << "E" << c.events.size();
        c.events.push_back({id.str(), Point(x0 + ux * lx, y0 + uy * ly, zmin + uz * (zmax - zmin)), 0.0});
    }
    return c;
}

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::size_t n_events, std::size_t n_stations,
                                                              std::size_t count, std::uint64_t seed)
{
    const std::size_t total = n_events * n_stations;
    std::vector<std::size_t> idx = shuffled(total, CounterRng(seed, kPairs));
    idx.resize(std::min(count, total));
    std::sort(idx.begin(), idx.end());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.emplace_back(i / n_stations, i % n_stations);
    return out;
}

std::vector<Arrival> simulate_arrivals(const VelocityGrid& truth, const std::vector<Event>& events,
                                       const std::vector<Station>& stations,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs, double sigma,
                                       std::uint64_t seed, double validation_fraction, int star_order)
{
    if (!(sigma >= 0.0)) throw UsageError("noise sigma must be nonnegative");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw UsageError("validation fraction must lie in [0, 1)");
    std::vector<Arrival> out;
    out.reserve(pairs.size());
    for (const auto& [e, s] : pairs) {
        if (e >= events.size() || s >= stations.size()) throw DataError("pair refers to an unknown event or station");
        out.push_back({e, s, 0.0, Split::Train});
    }
    const std::vector<double> t = predict_arrivals(truth, events, stations, out, star_order);
    const CounterRng noise(seed, kNoise);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].time = t[k] + (sigma > 0.0 ? sigma * noise.normal(k) : 0.0);

    const auto n_val = static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(out.size())));
    const std::vector<std::size_t> order = shuffled(out.size(), CounterRng(seed, kSplit));
    for (std::size_t k = 0; k < n_val; ++k) out[order[k]].split = Split::Validation;
    return out;
}

} // namespace letomo
