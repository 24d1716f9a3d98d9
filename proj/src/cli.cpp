#include "letomo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "letomo/errors.hpp"
#include "letomo/io.hpp"
#include "letomo/parallel.hpp"

namespace letomo {

namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
    return format_number(v);
}

// Dataset plus the truth it was simulated from, when known.
struct Problem {
    Dataset data;
    VelocityGrid initial;
    std::optional<VelocityGrid> truth;
    std::vector<Event> true_events; ///< empty for real data
};

Dataset synthesize(const ExperimentConfig& c, const SynthConfig& s, const VelocityGrid& truth)
{
    const Catalog cat = make_catalog(c.grid, s.n_events, s.n_stations, c.seed, s.south_bias, s.station_margin);
    const auto pairs = select_pairs(s.n_events, s.n_stations, s.n_arrivals, c.seed);
    Dataset d;
    d.events = cat.events;
    d.stations = cat.stations;
    d.arrivals = simulate_arrivals(truth, cat.events, cat.stations, pairs, s.scenario.noise_sigma, c.seed,
                                   s.validation_fraction, c.inversion.star_order);
    return d;
}

VelocityGrid initial_model(const ExperimentConfig& c)
{
    if (c.synth) return make_initial_model(c.synth->scenario, c.grid, c.initial_velocity);
    VelocityGrid g(c.grid, c.initial_velocity);
    if (c.input && !c.input->outer_profile.empty()) {
        const std::vector<double> p = read_profile(c.input->outer_profile);
        if (p.size() != static_cast<std::size_t>(c.grid.nz) + 1)
            throw DataError("outer profile needs " + std::to_string(c.grid.nz + 1) + " values (layers, then floor)");
        g.set_outer(std::vector<double>(p.begin(), p.end() - 1), p.back());
    }
    return g;
}

// The catalog comes from --data (a synth output directory), the config's
// input files, or a fresh simulation of the config's scenario.
Problem load_problem(const ExperimentConfig& c, const std::string& data_dir)
{
    Problem p{Dataset{}, initial_model(c), std::nullopt, {}};
    if (c.synth) p.truth = make_true_model(c.synth->scenario, c.grid);
    if (!data_dir.empty()) {
        const fs::path d(data_dir);
        p.data = load_catalog(d / "events.csv", d / "stations.csv", d / "arrivals.csv", c.frame(), c.grid, c.seed);
        if (fs::exists(d / "truth_grid.json")) p.truth = grid_from_json(read_json(d / "truth_grid.json"));
        if (p.truth) p.true_events = p.data.events;
    } else if (c.input) {
        p.data = load_catalog(c.input->events, c.input->stations, c.input->arrivals, c.frame(), c.grid, c.seed);
    } else if (c.synth) {
        p.data = synthesize(c, *c.synth, *p.truth);
        p.true_events = p.data.events;
    } else {
        throw ConfigError("config needs a synth or an input section, or pass --data");
    }
    p.data.validate();
    return p;
}

std::string lambda_label(const RegularizerSpec& s)
{
    switch (s.kind) {
    case PenaltyKind::DLS: return "";
    case PenaltyKind::Proposed:
    case PenaltyKind::L2Smooth: return num(s.lambda_ver) + ";" + num(s.lambda_hor);
    case PenaltyKind::Lap: return num(s.lambda_lap);
    case PenaltyKind::L1First: return num(s.lambda_l1first);
    case PenaltyKind::L1Second: return num(s.lambda_l1second);
    }
    return "";
}

struct Location {
    double mean = 0.0, median = 0.0, stddev = 0.0;
};

Location location_errors(const std::vector<Event>& estimate, const std::vector<Event>& truth)
{
    Location out;
    if (truth.empty() || truth.size() != estimate.size()) return out;
    std::vector<double> e;
    for (std::size_t i = 0; i < truth.size(); ++i) e.push_back((estimate[i].position - truth[i].position).norm());
    double sum = 0.0;
    for (double v : e) sum += v;
    out.mean = sum / static_cast<double>(e.size());
    double var = 0.0;
    for (double v : e) var += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(var / static_cast<double>(e.size()));
    std::sort(e.begin(), e.end());
    const std::size_t n = e.size();
    out.median = n % 2 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
    return out;
}

void write_profile(const fs::path& path, const Stamp& stamp, const VelocityGrid& grid,
                   const std::optional<VelocityGrid>& truth)
{
    const auto mean = layer_mean_profile(grid);
    std::optional<std::vector<ProfilePoint>> tmean;
    if (truth) tmean = layer_mean_profile(*truth);
    std::vector<std::vector<std::string>> rows;
    for (int z = 0; z < grid.nz(); ++z) {
        const bool inner = z >= 1 && z + 1 < grid.nz();
        std::vector<std::string> r{std::to_string(z), num(grid.layer_depth(z)), num(mean[z].value),
                                   inner ? num(std::sqrt(second_difference_gz(grid, z))) : ""};
        if (tmean) r.push_back(num((*tmean)[z].value));
        rows.push_back(r);
    }
    std::vector<std::string> header{"layer", "depth_km", "mean_velocity", "sqrt_gz"};
    if (tmean) header.push_back("true_mean_velocity");
    write_csv(path, stamp, header, rows);
}

void write_slices(const fs::path& path, const Stamp& stamp, const VelocityGrid& grid,
                  const std::optional<VelocityGrid>& truth)
{
    // Perturbation from the layer mean, percent.
    const auto mean = layer_mean_profile(grid);
    std::optional<std::vector<ProfilePoint>> tmean;
    if (truth) tmean = layer_mean_profile(*truth);
    const GridShape& s = grid.shape();
    std::vector<std::vector<std::string>> rows;
    for (int z = 0; z < s.nz; ++z)
        for (int x = 0; x < s.nx; ++x)
            for (int y = 0; y < s.ny; ++y) {
                const double v = grid.at(x, y, z);
                std::vector<std::string> r{std::to_string(z),
                                           std::to_string(x),
                                           std::to_string(y),
                                           num(s.origin.x() + x * s.dx),
                                           num(s.origin.y() + y * s.dy),
                                           num(v),
                                           num(100.0 * (v / mean[z].value - 1.0))};
                if (truth) {
                    const double t = truth->at(x, y, z);
                    r.push_back(num(t));
                    r.push_back(num(100.0 * (t / (*tmean)[z].value - 1.0)));
                }
                rows.push_back(r);
            }
    std::vector<std::string> header{"layer", "ix", "iy", "x_km", "y_km", "velocity", "perturbation_pct"};
    if (truth) {
        header.push_back("true_velocity");
        header.push_back("true_perturbation_pct");
    }
    write_csv(path, stamp, header, rows);
}

void write_events(const fs::path& path, const Stamp& stamp, const std::vector<Event>& events)
{
    std::vector<std::vector<std::string>> rows;
    for (const Event& e : events)
        rows.push_back({e.id, num(e.position.x()), num(e.position.y()), num(e.position.z()), num(e.origin_time)});
    write_csv(path, stamp, {"id", "x_km", "y_km", "z_km", "origin_time_s"}, rows);
}

struct MethodRun {
    RegularizerSpec spec;
    InversionResult result;
    double rmse = 0.0;
    std::optional<double> mae;
    Location location;
};

MethodRun run_method(const Problem& p, const ExperimentConfig& c, const RegularizerSpec& spec)
{
    InversionConfig cfg = c.inversion;
    cfg.spec = spec;
    const std::vector<Arrival> train = p.data.train();
    MethodRun m{spec, run_inversion(p.initial, p.data.events, p.data.stations, train, cfg), 0.0, std::nullopt, {}};
    const std::vector<Arrival> validation = p.data.validation();
    if (!validation.empty())
        m.rmse = rmse_validation(m.result.grid, m.result.events, p.data.stations, validation, cfg.star_order);
    if (p.truth) m.mae = mae(m.result.grid, *p.truth);
    m.location = location_errors(m.result.events, p.true_events);
    return m;
}

void write_run(const fs::path& dir, const Stamp& stamp, const Problem& p, const MethodRun& m)
{
    write_json(dir / "grid.json", grid_to_json(m.result.grid, stamp));
    write_profile(dir / "profile.csv", stamp, m.result.grid, p.truth);
    write_slices(dir / "slices.csv", stamp, m.result.grid, p.truth);
    write_events(dir / "events_estimated.csv", stamp, m.result.events);
    std::vector<std::vector<std::string>> rows;
    for (const auto& l : m.result.log)
        rows.push_back({std::to_string(l.iteration), num(l.rss_before), num(l.rss_after), num(l.objective),
                        std::to_string(l.admm_iterations), l.admm_converged ? "1" : "0", num(l.eta)});
    write_csv(dir / "outer_log.csv", stamp,
              {"iteration", "rss_before", "rss_after", "objective", "admm_iterations", "admm_converged", "eta"}, rows);
    rows.clear();
    for (const auto& a : m.result.admm_log)
        rows.push_back({std::to_string(a.iteration), num(a.objective), num(a.primal), num(a.dual), num(a.eta)});
    write_csv(dir / "admm_log.csv", stamp, {"iteration", "objective", "primal", "dual", "eta"}, rows);
    Json metrics{{"config_hash", stamp.hash},
                 {"seed", stamp.seed},
                 {"method", to_string(m.spec.kind)},
                 {"lambdas", lambda_label(m.spec)},
                 {"rmse_validation", m.rmse},
                 {"warnings", m.result.warnings}};
    if (m.mae) metrics["mae"] = *m.mae;
    if (!p.true_events.empty())
        metrics["location_error_km"] = {
            {"mean", m.location.mean}, {"median", m.location.median}, {"std", m.location.stddev}};
    write_json(dir / "metrics.json", metrics);
}

const RegularizerSpec& select_method(const ExperimentConfig& c, const std::string& name)
{
    if (name.empty()) return c.methods.front();
    for (const auto& m : c.methods)
        if (to_string(m.kind) == name) return m;
    throw UsageError("method " + name + " is not listed in the config");
}

CvGrid run_cv(const Problem& p, const ExperimentConfig& c, const RegularizerSpec& spec)
{
    InversionConfig cfg = c.inversion;
    cfg.spec = spec;
    return cross_validate(p.initial, p.data, cfg, c.cv.first, c.cv.second);
}

void write_cv(const fs::path& dir, const Stamp& stamp, const CvGrid& cv, const std::string& prefix)
{
    std::vector<std::vector<std::string>> rows;
    for (const auto& cell : cv.cells)
        rows.push_back({num(cell.first), num(cell.second), cell.valid ? num(cell.rmse) : "", cell.valid ? "1" : "0",
                        cell.message});
    write_csv(dir / (prefix + "cv_grid.csv"), stamp, {"first", "second", "rmse", "valid", "message"}, rows);
}

void prepare_out(const std::string& out)
{
    if (out.empty()) throw UsageError("--out is required");
    fs::create_directories(out);
}

int cmd_synth(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
    if (!c.synth) throw ConfigError("synth needs a synth section in the config");
    const Stamp stamp = stamp_of(c);
    const VelocityGrid truth = make_true_model(c.synth->scenario, c.grid);
    const Dataset d = synthesize(c, *c.synth, truth);
    write_catalog(out, d, stamp);
    write_json(out / "truth_grid.json", grid_to_json(truth, stamp));
    write_json(out / "initial_grid.json", grid_to_json(initial_model(c), stamp));
    write_profile(out / "truth_profile.csv", stamp, truth, std::nullopt);
    log << "synth: " << d.events.size() << " events, " << d.stations.size() << " stations, " << d.arrivals.size()
        << " arrivals\n";
    return 0;
}

int cmd_invert(const ExperimentConfig& c, const fs::path& out, const std::string& data, const std::string& method,
               std::ostream& log)
{
    const Stamp stamp = stamp_of(c);
    const Problem p = load_problem(c, data);
    const MethodRun m = run_method(p, c, select_method(c, method));
    write_run(out, stamp, p, m);
    log << "invert " << to_string(m.spec.kind) << ": rmse " << m.rmse;
    if (m.mae) log << ", mae " << *m.mae;
    log << "\n";
    return 0;
}

int cmd_cv(const ExperimentConfig& c, const fs::path& out, const std::string& data, const std::string& method,
           std::ostream& log)
{
    const Stamp stamp = stamp_of(c);
    const Problem p = load_problem(c, data);
    const RegularizerSpec& spec = select_method(c, method);
    const CvGrid cv = run_cv(p, c, spec);
    write_cv(out, stamp, cv, "");
    const RegularizerSpec chosen = chosen_spec(cv, spec);
    Json j{{"config_hash", stamp.hash},
           {"seed", stamp.seed},
           {"method", to_string(chosen.kind)},
           {"lambdas", lambda_label(chosen)},
           {"rmse", cv.cells[cv.chosen].rmse},
           {"warnings", cv.warnings},
           {"spec",
            {{"kind", to_string(chosen.kind)},
             {"lambda_ver", chosen.lambda_ver},
             {"lambda_hor", chosen.lambda_hor},
             {"lambda_lap", chosen.lambda_lap},
             {"lambda_l1first", chosen.lambda_l1first},
             {"lambda_l1second", chosen.lambda_l1second},
             {"eps_v", chosen.eps_v},
             {"eps_h", chosen.eps_h}}}};
    write_json(out / "chosen.json", j);
    log << "cv " << to_string(chosen.kind) << ": chose " << lambda_label(chosen) << "\n";
    return 0;
}

int cmd_compare(const ExperimentConfig& c, const fs::path& out, const std::string& data, std::ostream& log)
{
    const Stamp stamp = stamp_of(c);
    const Problem p = load_problem(c, data);
    std::vector<MethodRun> runs;
    for (const RegularizerSpec& base : c.methods) {
        RegularizerSpec spec = base;
        if (c.cv.enabled && spec.kind != PenaltyKind::DLS) {
            const CvGrid cv = run_cv(p, c, base);
            write_cv(out, stamp, cv, to_string(base.kind) + "_");
            spec = chosen_spec(cv, base);
        }
        runs.push_back(run_method(p, c, spec));
        const fs::path dir = out / to_string(spec.kind);
        fs::create_directories(dir);
        write_run(dir, stamp, p, runs.back());
        log << to_string(spec.kind) << " done\n";
    }

    std::vector<std::vector<std::string>> rows;
    for (const auto& m : runs)
        rows.push_back({to_string(m.spec.kind), lambda_label(m.spec), m.mae ? num(*m.mae) : "", num(m.rmse),
                        p.true_events.empty() ? "" : num(m.location.mean)});
    write_csv(out / "mae.csv", stamp, {"method", "lambdas", "mae", "rmse_validation", "location_error_mean_km"}, rows);

    // Layer-mean profiles and sqrt(g_z) side by side.
    rows.clear();
    std::vector<std::string> header{"layer", "depth_km"};
    if (p.truth) header.push_back("truth");
    for (const auto& m : runs) header.push_back(to_string(m.spec.kind));
    std::optional<std::vector<ProfilePoint>> tmean;
    if (p.truth) tmean = layer_mean_profile(*p.truth);
    std::vector<std::vector<ProfilePoint>> means;
    for (const auto& m : runs) means.push_back(layer_mean_profile(m.result.grid));
    for (int z = 0; z < c.grid.nz; ++z) {
        std::vector<std::string> r{std::to_string(z), num(p.initial.layer_depth(z))};
        if (tmean) r.push_back(num((*tmean)[z].value));
        for (const auto& mm : means) r.push_back(num(mm[z].value));
        rows.push_back(r);
    }
    write_csv(out / "profiles.csv", stamp, header, rows);
    rows.clear();
    for (int z = 1; z + 1 < c.grid.nz; ++z) {
        std::vector<std::string> r{std::to_string(z), num(p.initial.layer_depth(z))};
        if (p.truth) r.push_back(num(std::sqrt(second_difference_gz(*p.truth, z))));
        for (const auto& m : runs) r.push_back(num(std::sqrt(second_difference_gz(m.result.grid, z))));
        rows.push_back(r);
    }
    write_csv(out / "gz.csv", stamp, header, rows);
    for (const auto& m : runs) {
        log << to_string(m.spec.kind) << " " << lambda_label(m.spec);
        if (m.mae) log << " mae " << *m.mae;
        log << " rmse " << m.rmse << "\n";
    }
    return 0;
}

int cmd_relocate(const ExperimentConfig& c, const fs::path& out, const std::string& data, const std::string& grid_path,
                 std::ostream& log)
{
    const Stamp stamp = stamp_of(c);
    const Problem p = load_problem(c, data);
    const VelocityGrid grid = grid_path.empty() ? p.initial : grid_from_json(read_json(grid_path));
    const std::vector<Arrival> train = p.data.train();
    std::vector<std::vector<Pick>> picks(p.data.events.size());
    std::vector<bool> needed(p.data.stations.size(), false);
    for (const Arrival& a : train) {
        picks[a.event].push_back({a.station, a.time});
        needed[a.station] = true;
    }
    const StationTrees trees(grid, p.data.stations, c.inversion.star_order, needed);
    std::vector<RelocationOutcome> res(p.data.events.size());
    parallel_for(res.size(), [&](std::size_t i) {
        res[i] = relocate_event(trees, p.data.events[i], picks[i], c.inversion.relocation);
    });
    std::vector<Event> moved;
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const Event& e = res[i].event;
        moved.push_back(e);
        rows.push_back({e.id, num(e.position.x()), num(e.position.y()), num(e.position.z()), num(e.origin_time),
                        res[i].relocatable ? "1" : "0", std::to_string(res[i].iterations), num(res[i].rss_before),
                        num(res[i].rss_after)});
    }
    write_csv(out / "relocation.csv", stamp,
              {"id", "x_km", "y_km", "z_km", "origin_time_s", "relocatable", "iterations", "rss_before", "rss_after"},
              rows);
    Json summary{{"config_hash", stamp.hash}, {"seed", stamp.seed}, {"events", res.size()}};
    if (!p.true_events.empty()) {
        const Location l = location_errors(moved, p.true_events);
        summary["location_error_km"] = {{"mean", l.mean}, {"median", l.median}, {"std", l.stddev}};
    }
    write_json(out / "relocation_summary.json", summary);
    log << "relocate: " << res.size() << " events\n";
    return 0;
}

int cmd_export(const std::string& grid_path, const fs::path& out, const std::string& truth_path, std::ostream& log)
{
    const Json j = read_json(grid_path);
    const VelocityGrid grid = grid_from_json(j);
    const Stamp stamp{j.value("config_hash", std::string()), j.value("seed", std::uint64_t{0})};
    std::optional<VelocityGrid> truth;
    if (!truth_path.empty()) truth = grid_from_json(read_json(truth_path));
    write_profile(out / "profile.csv", stamp, grid, truth);
    write_slices(out / "slices.csv", stamp, grid, truth);
    log << "export: " << grid.parameter_count() << " nodes\n";
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"letomo: local earthquake tomography with structured regularization"};
    app.require_subcommand(1);
    std::string config, out_dir, data, method, grid, truth;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config, "experiment config (JSON)")->required();
        s->add_option("--out", out_dir, "output directory")->required();
    };
    CLI::App* synth = app.add_subcommand("synth", "simulate a scenario and write its catalog");
    add_common(synth);
    CLI::App* invert = app.add_subcommand("invert", "run one method end to end");
    add_common(invert);
    CLI::App* cv = app.add_subcommand("cv", "cross-validate one method's lambdas");
    add_common(cv);
    CLI::App* compare = app.add_subcommand("compare", "run every configured method on one dataset");
    add_common(compare);
    CLI::App* relocate = app.add_subcommand("relocate", "relocate events on a fixed grid");
    add_common(relocate);
    for (CLI::App* s : {invert, cv, compare, relocate})
        s->add_option("--data", data, "catalog directory written by synth");
    for (CLI::App* s : {invert, cv}) s->add_option("--method", method, "method kind from the config's list");
    relocate->add_option("--grid", grid, "velocity grid JSON (default: the initial model)");
    CLI::App* exp = app.add_subcommand("export", "layer slices and profiles from a saved grid");
    exp->add_option("--grid", grid, "velocity grid JSON")->required();
    exp->add_option("--truth", truth, "true grid JSON for comparison");
    exp->add_option("--out", out_dir, "output directory")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        try {
            app.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            throw UsageError(e.what());
        }
        prepare_out(out_dir);
        if (*exp) return cmd_export(grid, out_dir, truth, out);
        const ExperimentConfig c = load_config(config);
        write_json(fs::path(out_dir) / "config.json", to_json(c));
        if (*synth) return cmd_synth(c, out_dir, out);
        if (*invert) return cmd_invert(c, out_dir, data, method, out);
        if (*cv) return cmd_cv(c, out_dir, data, method, out);
        if (*compare) return cmd_compare(c, out_dir, data, out);
        if (*relocate) return cmd_relocate(c, out_dir, data, grid, out);
        throw UsageError("no subcommand");
    } catch (const Error& e) {
        err << error_json(e.kind(), e.what()).dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << "\n";
        return 3;
    }
}

} // namespace letomo
