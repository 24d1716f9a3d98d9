#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "letomo/forward.hpp"
#include "letomo/regularizers.hpp"

namespace letomo {

/// Hypocentral parameters (x, y, z, tau) of an event.
Eigen::Vector4d hypocenter_vector(const Event& e);

/// Linearized rows of one event: r ~ Jv dv + Jh dh, restricted to the
/// velocity columns its rays touch.
struct LinearizedEvent {
    std::size_t event = 0;
    std::vector<std::size_t> arrivals; ///< positions in the arrival span
    std::vector<int> columns;          ///< sorted parameter indices
    Eigen::MatrixXd jv;                ///< arrivals x columns
    Eigen::MatrixXd jh;                ///< arrivals x 4
    Eigen::VectorXd residual;          ///< T_obs - T_cal
};

/// Quadratic model of RSS + D around (v0, h0):
///   sum_i ||Jv_i dv + Jh_i dh_i - r_i||^2 + eps_v ||v0 + dv - v_init||^2
///   + eps_h sum_i ||h0_i + dh_i - h_init_i||^2.
struct LinearizedSystem {
    std::size_t parameter_count = 0;
    std::vector<LinearizedEvent> events;
    Eigen::VectorXd v0, v_init;
    std::vector<Eigen::Vector4d> h0, h_init; ///< indexed like `events`
    double eps_v = 0.0;
    double eps_h = 0.0;

    /// Value of the quadratic model at (v, h) with h indexed like `events`.
    double model(const Eigen::VectorXd& v, const std::vector<Eigen::Vector4d>& h) const;
};

/// `rays[k]` belongs to `arrivals[k]` and was traced on `grid`.
LinearizedSystem build_linearized_system(const VelocityGrid& grid, const std::vector<Event>& events,
                                         const std::vector<Event>& initial_events,
                                         const std::vector<Station>& stations, std::span<const Arrival> arrivals,
                                         const std::vector<RayPath>& rays, const Eigen::VectorXd& v_init,
                                         const RegularizerSpec& spec);

/// Per-event factors for recovering dh once dv is known.
struct EventFactor {
    std::size_t event = 0;
    int rank = 0;
    Eigen::MatrixXd r;                 ///< rank x rank upper triangular
    Eigen::VectorXi permutation;       ///< pivoted column order
    Eigen::VectorXd q1_rhs;            ///< rank
    Eigen::MatrixXd q1_jv;             ///< rank x columns
    std::vector<int> columns;
};

/// l(v) = ||B (v - v0) - c||^2 + eps_v ||v - v_init||^2, kept in normal form.
struct SeparatedQuadratic {
    std::size_t parameter_count = 0;
    std::size_t row_count = 0;   ///< rows of B
    Eigen::MatrixXd normal;      ///< B^T B
    Eigen::VectorXd rhs;         ///< B^T c
    double constant = 0.0;       ///< c^T c
    Eigen::VectorXd v0, v_init;
    double eps_v = 0.0;
    std::vector<EventFactor> factors;
    std::vector<std::string> warnings;

    double value(const Eigen::VectorXd& v) const;
    /// Joint minimizer of the quadratic over h for fixed v, as dh per event
    /// (indexed like the system's events). Frozen directions stay zero.
    std::vector<Eigen::Vector4d> hypocenter_steps(const Eigen::VectorXd& v) const;
};

/// Eliminates each event's four hypocenter columns by an orthogonal
/// factorization. Rank-deficient events get their null directions frozen and
/// a warning.
SeparatedQuadratic qr_separate(const LinearizedSystem& system);

/// Shortest-path trees rooted at stations, for one grid snapshot.
class StationTrees {
public:
    /// Trees are built only for stations with `needed[s]` (all when empty).
    StationTrees(const VelocityGrid& grid, const std::vector<Station>& stations, int star_order,
                 const std::vector<bool>& needed = {});

    const RayTracer& tracer() const { return *tracer_; }
    const ShortestPathTree& tree(std::size_t station) const;

private:
    std::unique_ptr<RayTracer> tracer_;
    std::vector<std::optional<ShortestPathTree>> trees_;
};

struct RelocationOptions {
    int max_iterations = 10;
    double step_cells = 1.0; ///< per-axis step clip, in grid cells
    double mu0 = 1e-3;
    double position_tol = 1e-3; ///< km; smaller accepted steps end the search
    double rss_tol = 1e-6;      ///< relative RSS gain below which the search ends
};

struct RelocationOutcome {
    Event event;
    bool relocatable = true;
    int iterations = 0;
    double rss_before = 0.0;
    double rss_after = 0.0;
};

/// Pick of one event at one station.
struct Pick {
    std::size_t station;
    double time;
};

/// Damped Gauss-Newton on (x, y, z, tau) with the velocity frozen. Steps are
/// clipped to `step_cells` cells per axis, depth to >= 0, and the event to
/// the padded domain; a step is kept only if the event's RSS decreases.
RelocationOutcome relocate_event(const StationTrees& trees, const Event& event, const std::vector<Pick>& picks,
                                 const RelocationOptions& options = {});

/// Travel time residual sum of squares of one event.
double event_rss(const StationTrees& trees, const Event& event, const std::vector<Pick>& picks);

} // namespace letomo
