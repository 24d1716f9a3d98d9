#pragma once

#include <span>
#include <string>
#include <vector>

#include "letomo/forward.hpp"
#include "letomo/relocation.hpp"
#include "letomo/solver.hpp"

namespace letomo {

/// Events, stations and arrivals. Arrivals refer to events and stations by
/// index. Reads of the validation subset are counted so tests can check
/// that training never touches it.
class Dataset {
public:
    std::vector<Event> events;
    std::vector<Station> stations;
    std::vector<Arrival> arrivals;

    std::vector<Arrival> train() const;
    /// Counted in validation_reads().
    std::vector<Arrival> validation() const;
    std::size_t validation_reads() const { return validation_reads_; }

    /// Throws DataError on unknown indices or duplicate (event, station) pairs.
    void validate() const;

private:
    mutable std::size_t validation_reads_ = 0;
};

struct InversionConfig {
    RegularizerSpec spec;
    SolverConfig solver;
    int star_order = 3;
    double min_velocity = 1.0; ///< floor applied to solved velocities, km/s
    double step_cells = 1.0;   ///< clip for back-substituted hypocenter steps
    bool relocate = true;      ///< Gauss-Newton refinement after each update
    /// Damping anchor: the starting model, or the current iterate (the
    /// damping then penalizes each outer update only).
    enum class Damping { Initial, Iterate } damping = Damping::Initial;
    RelocationOptions relocation;
};

struct OuterIteration {
    int iteration;
    double rss_before;
    double rss_after;
    double objective;
    int admm_iterations;
    bool admm_converged;
    double eta;
};

struct InversionResult {
    VelocityGrid grid;
    std::vector<Event> events;
    std::vector<OuterIteration> log;
    std::vector<AdmmIteration> admm_log; ///< last outer iteration
    std::vector<RelocationOutcome> relocation; ///< last outer iteration, per event
    std::vector<std::string> warnings;
};

/// Joint velocity and hypocenter estimation on training arrivals: trace rays,
/// linearize, separate, solve for v, back-substitute h, relocate, repeat.
/// The initial grid and events are the damping anchors.
InversionResult run_inversion(const VelocityGrid& initial, const std::vector<Event>& initial_events,
                              const std::vector<Station>& stations, std::span<const Arrival> train,
                              const InversionConfig& config);

/// Travel-time residual sum of squares of `arrivals` on `grid`.
double arrival_rss(const VelocityGrid& grid, const std::vector<Event>& events, const std::vector<Station>& stations,
                   std::span<const Arrival> arrivals, int star_order);

/// T_cal for each arrival (origin time included).
std::vector<double> predict_arrivals(const VelocityGrid& grid, const std::vector<Event>& events,
                                     const std::vector<Station>& stations, std::span<const Arrival> arrivals,
                                     int star_order);

} // namespace letomo
