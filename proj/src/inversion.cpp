#include "letomo/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "letomo/errors.hpp"
#include "letomo/parallel.hpp"

namespace letomo {

std::vector<Arrival> Dataset::train() const
{
    std::vector<Arrival> out;
    for (const Arrival& a : arrivals)
        if (a.split == Split::Train) out.push_back(a);
    return out;
}

std::vector<Arrival> Dataset::validation() const
{
    ++validation_reads_;
    std::vector<Arrival> out;
    for (const Arrival& a : arrivals)
        if (a.split == Split::Validation) out.push_back(a);
    return out;
}

void Dataset::validate() const
{
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < arrivals.size(); ++k) {
        const Arrival& a = arrivals[k];
        std::ostringstream os;
        if (a.event >= events.size())
            os << "arrival " << k << " refers to unknown event index " << a.event;
        else if (a.station >= stations.size())
            os << "arrival " << k << " refers to unknown station index " << a.station;
        else if (!std::isfinite(a.time))
            os << "arrival " << k << " has a non-finite time";
        else if (!seen.insert({a.event, a.station}).second)
            os << "arrival " << k << " duplicates the pair (" << events[a.event].id << ", " << stations[a.station].id
               << ")";
        if (!os.str().empty()) throw DataError(os.str());
    }
}

namespace {

std::vector<bool> station_mask(std::size_t stations, std::span<const Arrival> arrivals)
{
    std::vector<bool> needed(stations, false);
    for (const Arrival& a : arrivals) needed.at(a.station) = true;
    return needed;
}

std::vector<double> predict(const StationTrees& trees, const std::vector<Event>& events,
                            std::span<const Arrival> arrivals)
{
    std::vector<double> out(arrivals.size());
    parallel_for(arrivals.size(), [&](std::size_t k) {
        const Event& e = events.at(arrivals[k].event);
        out[k] = e.origin_time + trees.tree(arrivals[k].station).time_to(e.position);
    });
    return out;
}

double rss_of(const std::vector<double>& predicted, std::span<const Arrival> arrivals)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < arrivals.size(); ++k) sum += std::pow(arrivals[k].time - predicted[k], 2);
    return sum;
}

} // namespace

std::vector<double> predict_arrivals(const VelocityGrid& grid, const std::vector<Event>& events,
                                     const std::vector<Station>& stations, std::span<const Arrival> arrivals,
                                     int star_order)
{
    const StationTrees trees(grid, stations, star_order, station_mask(stations.size(), arrivals));
    return predict(trees, events, arrivals);
}

double arrival_rss(const VelocityGrid& grid, const std::vector<Event>& events, const std::vector<Station>& stations,
                   std::span<const Arrival> arrivals, int star_order)
{
    return rss_of(predict_arrivals(grid, events, stations, arrivals, star_order), arrivals);
}

InversionResult run_inversion(const VelocityGrid& initial, const std::vector<Event>& initial_events,
                              const std::vector<Station>& stations, std::span<const Arrival> train,
                              const InversionConfig& config)
{
    config.spec.validate();
    config.solver.validate();
    if (!(config.min_velocity > 0.0)) throw ConfigError("min_velocity must be positive");
    if (train.empty()) throw UsageError("no training arrivals");

    InversionResult out{initial, initial_events, {}, {}, {}, {}};
    const std::vector<bool> needed = station_mask(stations.size(), train);
    const Eigen::VectorXd v_init = initial.interior();
    const GridShape& shape = initial.shape();
    const double cell[3] = {shape.dx, shape.dy, shape.dz};

    std::vector<std::vector<Pick>> picks(initial_events.size());
    for (const Arrival& a : train) picks.at(a.event).push_back({a.station, a.time});

    auto clamp_event = [&](Event& e) {
        const VelocityGrid& g = out.grid;
        e.position.x() = std::clamp(e.position.x(), g.axis_x().front(), g.axis_x().back());
        e.position.y() = std::clamp(e.position.y(), g.axis_y().front(), g.axis_y().back());
        e.position.z() = std::clamp(e.position.z(), std::max(0.0, g.axis_z().front()), g.axis_z().back());
    };

    for (int outer = 1; outer <= config.solver.outer_iterations; ++outer) {
        OuterIteration log{outer, 0.0, 0.0, 0.0, 0, true, config.solver.eta};

        const StationTrees trees(out.grid, stations, config.star_order, needed);
        std::vector<RayPath> rays(train.size());
        parallel_for(train.size(), [&](std::size_t k) {
            rays[k] = trees.tree(train[k].station).path_from(out.events.at(train[k].event).position);
        });
        log.rss_before = rss_of(predict(trees, out.events, train), train);

        const bool iterate = config.damping == InversionConfig::Damping::Iterate;
        const LinearizedSystem sys =
            build_linearized_system(out.grid, out.events, iterate ? out.events : initial_events, stations, train, rays,
                                    iterate ? out.grid.interior() : v_init, config.spec);
        const SeparatedQuadratic sep = qr_separate(sys);
        for (const std::string& w : sep.warnings)
            out.warnings.push_back("iteration " + std::to_string(outer) + ": " + w);

        const SolveResult sol = solve_velocity(sep, out.grid, config.spec, config.solver);
        log.objective = sol.objective;
        log.admm_iterations = sol.state.iterations;
        log.admm_converged = sol.state.iterations == 0 || sol.state.converged;
        log.eta = sol.state.iterations ? sol.state.eta : config.solver.eta;
        out.admm_log = sol.state.log;
        if (sol.state.iterations && !sol.state.converged)
            out.warnings.push_back("iteration " + std::to_string(outer) + ": ADMM stopped at the iteration limit");

        const std::vector<Eigen::Vector4d> dh = sep.hypocenter_steps(sol.v);
        out.grid.set_interior(sol.v.cwiseMax(config.min_velocity));

        for (std::size_t i = 0; i < sys.events.size(); ++i) {
            Eigen::Vector4d step = dh[i];
            double scale = 1.0;
            for (int c = 0; c < 3; ++c)
                if (std::abs(step[c]) > config.step_cells * cell[c])
                    scale = std::min(scale, config.step_cells * cell[c] / std::abs(step[c]));
            step *= scale;
            Event& e = out.events[sys.events[i].event];
            e.position += step.head<3>();
            e.origin_time += step[3];
            clamp_event(e);
        }

        if (config.relocate) {
            const StationTrees updated(out.grid, stations, config.star_order, needed);
            std::vector<RelocationOutcome> moved(out.events.size());
            parallel_for(out.events.size(), [&](std::size_t i) {
                moved[i] = relocate_event(updated, out.events[i], picks[i], config.relocation);
            });
            for (std::size_t i = 0; i < moved.size(); ++i) out.events[i] = moved[i].event;
            out.relocation = std::move(moved);
            log.rss_after = rss_of(predict(updated, out.events, train), train);
        } else {
            log.rss_after = arrival_rss(out.grid, out.events, stations, train, config.star_order);
        }
        out.log.push_back(log);
    }
    return out;
}

} // namespace letomo
