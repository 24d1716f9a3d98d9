#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "letomo/forward.hpp"
#include "letomo/grid.hpp"

namespace letomo {

enum class ScenarioKind { VelocityJump, Checkerboard3D, DippingInterface, MultiLayer, HighVelocityZone, Homogeneous };

std::string to_string(ScenarioKind kind);
/// Throws ConfigError for unknown names.
ScenarioKind parse_scenario_kind(const std::string& name);

struct Scenario {
    ScenarioKind kind = ScenarioKind::VelocityJump;
    double base_velocity = 4.0; ///< km/s above the jump
    double jump = 1.0;          ///< total velocity increase across the jump, km/s
    int jump_layer = 12;        ///< layer holding the midpoint value
    double amplitude = 0.05;    ///< checkerboard anomaly fraction
    bool phase = false;         ///< true flips every checkerboard sign
    double noise_sigma = 0.1;   ///< s
    std::uint64_t seed = 1;
    double block_velocity = 5.0; ///< HighVelocityZone
    /// HighVelocityZone block, inclusive: x0, x1, y0, y1, z0, z1.
    std::array<int, 6> block{2, 3, 2, 3, 8, 15};

    void validate() const;
};

/// Paper-shaped lattice: 6 x 6 x 26, 8 km horizontal and 1 km vertical
/// spacing, centred horizontally on (0, 0), surface at depth 0.
GridShape paper_grid_shape();

/// Layer-mean velocity of the scenario without anomalies. DippingInterface
/// reports the westernmost column.
std::vector<double> baseline_profile(const Scenario& scenario, int nz);

/// VelocityJump: base / base + jump/2 at jump_layer / base + jump, times
/// (1 + amplitude s) with s = (-1)^(x+y).
/// Checkerboard3D: base (1 + amplitude s) with s = (-1)^(x+y+floor(z/4)).
/// DippingInterface: VelocityJump profile per column whose jump layer runs
/// from 8 (west) to 14 (east), plus the checkerboard.
/// MultiLayer: layer-uniform steps of jump/2 at layers 6, 13 and 20, each
/// with a one-layer midpoint.
/// HighVelocityZone: base everywhere with block_velocity inside the block.
/// Homogeneous: base everywhere.
/// Outer ring and floor follow baseline_profile.
VelocityGrid make_true_model(const Scenario& scenario, const GridShape& shape);

/// Grid with uniform interior `velocity` and the scenario's baseline profile
/// at the fixed outer points.
VelocityGrid make_initial_model(const Scenario& scenario, const GridShape& shape, double velocity);

struct Catalog {
    std::vector<Event> events;
    std::vector<Station> stations;
};

/// Stations on a jittered horizontal lattice at 0-0.5 km depth; events
/// uniform over the interior hull at 1 km to (bottom - 1 km) depth. With
/// south_bias, three of four candidates in the southern half (y below the
/// centre) are rejected.
Catalog make_catalog(const GridShape& shape, std::size_t n_events, std::size_t n_stations, std::uint64_t seed,
                     bool south_bias = false, double station_margin = 0.0);

/// A seeded random subset of `count` (event, station) pairs, sorted; all
/// pairs when count exceeds their number.
std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::size_t n_events, std::size_t n_stations,
                                                              std::size_t count, std::uint64_t seed);

/// Observed times on the true grid plus N(0, sigma^2) noise drawn from
/// (seed, arrival index). A seeded shuffle marks round(validation_fraction n)
/// arrivals as validation.
std::vector<Arrival> simulate_arrivals(const VelocityGrid& truth, const std::vector<Event>& events,
                                       const std::vector<Station>& stations,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs, double sigma,
                                       std::uint64_t seed, double validation_fraction = 0.25, int star_order = 3);

} // namespace letomo
