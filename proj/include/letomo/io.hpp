#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "letomo/evaluation.hpp"
#include "letomo/synth.hpp"

namespace letomo {

using Json = nlohmann::json;

/// Flat-earth equirectangular projection about a geographic anchor, which
/// maps to local (0, 0).
struct GeoFrame {
    double lat0 = 0.0;
    double lon0 = 0.0;
    static constexpr double kEarthRadius = 6371.0; ///< km

    Point to_local(double lat, double lon, double depth_km) const;
    /// (lat, lon) of a local position.
    std::pair<double, double> to_geographic(const Point& p) const;
};

/// Synthetic data generation parameters.
struct SynthConfig {
    Scenario scenario;
    std::size_t n_events = 200;
    std::size_t n_stations = 68;
    std::size_t n_arrivals = 3954;
    bool south_bias = false;
    double station_margin = 0.0; ///< km beyond the interior hull
    double validation_fraction = 0.25;
};

/// Paths of a catalog held on disk.
struct InputConfig {
    std::string events;
    std::string stations;
    std::string arrivals;
    std::string outer_profile; ///< optional; one velocity per layer plus the floor
};

struct CvConfig {
    bool enabled = false;
    std::vector<double> first = default_candidates();
    std::vector<double> second = default_candidates();
};

/// Everything a command needs. Built from JSON; unknown keys are rejected.
struct ExperimentConfig {
    GridShape grid = paper_grid_shape();
    double center_lat = 0.0;
    double center_lon = 0.0;
    std::optional<SynthConfig> synth;
    std::optional<InputConfig> input;
    double initial_velocity = 4.0;
    std::vector<RegularizerSpec> methods{RegularizerSpec{}};
    InversionConfig inversion;
    CvConfig cv;
    std::uint64_t seed = 1;

    GeoFrame frame() const;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully populated form; parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Provenance embedded in every artifact.
struct Stamp {
    std::string hash;
    std::uint64_t seed = 0;
};
Stamp stamp_of(const ExperimentConfig& c);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

/// Rows of a CSV table. Lines starting with '#' are comments.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> lines; ///< 1-based source line of each row

    /// Column index of `name`, or -1.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
/// Writes a "# config_hash=..., seed=..." line, the header, then the rows.
void write_csv(const std::filesystem::path& path, const Stamp& stamp, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Reads events (id, lat, lon, depth_km, origin_time_s, or id, x_km, y_km,
/// z_km, origin_time_s), stations (id, lat, lon, elev_m, or id, x_km, y_km,
/// z_km) and arrivals (event_id, station_id, t_obs_s[, split]). Without a
/// split column a seeded shuffle marks round(validation_fraction n) arrivals
/// for validation. Stations above the grid top are lowered onto it. All
/// problems are collected and thrown as one DataError, one per line.
Dataset load_catalog(const std::filesystem::path& events, const std::filesystem::path& stations,
                     const std::filesystem::path& arrivals, const GeoFrame& frame, const GridShape& grid,
                     std::uint64_t seed, double validation_fraction = 0.25);

/// Writes the three catalog files in Cartesian form.
void write_catalog(const std::filesystem::path& dir, const Dataset& data, const Stamp& stamp);

Json grid_to_json(const VelocityGrid& grid, const Stamp& stamp);
VelocityGrid grid_from_json(const Json& j);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

/// Outer profile file: one value per line (nz ring values, then the floor).
std::vector<double> read_profile(const std::filesystem::path& path);

/// {"error": {"kind": ..., "message": ...}}
Json error_json(const std::string& kind, const std::string& message);

} // namespace letomo
