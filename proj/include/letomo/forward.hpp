#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "letomo/grid.hpp"

namespace letomo {

enum class Split { Train, Validation };

struct Event {
    std::string id;
    Point position = Point::Zero(); ///< hypocenter, km
    double origin_time = 0.0;       ///< s
};

struct Station {
    std::string id;
    Point position = Point::Zero();
};

struct Arrival {
    std::size_t event = 0;   ///< index into the event list
    std::size_t station = 0; ///< index into the station list
    double time = 0.0;       ///< observed arrival time, s
    Split split = Split::Train;
};

/// Polyline from hypocenter to station. Segment i joins vertices[i] and
/// vertices[i+1]; its trilinear weights are evaluated at the midpoint.
struct RayPath {
    std::vector<Point> vertices;
    std::vector<double> lengths;
    std::vector<std::array<Corner, 8>> weights;

    std::size_t segment_count() const { return lengths.size(); }
    double length() const;
};

/// Sparse row of partial derivatives keyed by interior parameter index,
/// sorted by index.
using SparseRow = std::vector<std::pair<std::size_t, double>>;

/// Samples per edge when integrating slowness along a straight segment.
inline constexpr int kEdgeSamples = 5;

/// Largest forward-star order; edges spanning more cells than this get
/// proportionally more samples.
inline constexpr int kMaxStarOrder = 3;

class ShortestPathTree;

/// Shortest-path ray tracer on the padded lattice.
///
/// Graph vertices are lattice nodes plus the two ray endpoints. Lattice
/// edges join each node to the nodes reached by the primitive offsets of
/// the forward star (max |component| <= star_order). An endpoint connects
/// to every node within endpoint_reach - 1 cells of its enclosing cell
/// (default 2 * star_order), and the two endpoints connect directly when
/// their cells are that close. Edge cost is the segment length times the
/// mean slowness at the midpoints of equal sub-segments: kEdgeSamples for
/// an edge spanning up to kMaxStarOrder cells per axis, and kEdgeSamples
/// more for every further kMaxStarOrder cells.
///
/// The tracer owns a snapshot of the grid; later grid edits do not affect it.
class RayTracer {
public:
    RayTracer(const VelocityGrid& grid, int star_order, int endpoint_reach = 0);

    const VelocityGrid& grid() const { return grid_; }
    int star_order() const { return order_; }
    int endpoint_reach() const { return reach_; }
    std::size_t offset_count() const { return offsets_.size(); }

    /// Dijkstra tree rooted at `root`. The tree refers back to this tracer,
    /// which must outlive it.
    ShortestPathTree tree(const Point& root) const;

    double edge_cost(const Point& a, const Point& b) const;

    /// Number of sub-segments used for the straight edge a -> b.
    int sample_count(const Point& a, const Point& b) const;
    static int sample_count(const std::array<int, 3>& cell_a, const std::array<int, 3>& cell_b);

private:
    friend class ShortestPathTree;

    void window(const std::array<int, 3>& cell, std::vector<int>& nodes) const;
    bool directly_connected(const std::array<int, 3>& a, const std::array<int, 3>& b) const;
    double edge_cost(const Point& a, const Point& b, int count) const;

    VelocityGrid grid_;
    int order_;
    int reach_;
    double max_velocity_;
    std::vector<std::array<int, 3>> offsets_;
    std::vector<int> neighbor_;
    std::vector<double> cost_;
};

/// First-arrival times from one root point to every lattice node.
class ShortestPathTree {
public:
    const Point& root() const { return root_; }

    /// Minimum travel time (without origin time) from p to the root.
    double time_to(const Point& p) const;

    /// Minimum-time path from p to the root, subdivided into sub-segments.
    RayPath path_from(const Point& p) const;

    double node_time(int node) const { return dist_[node]; }

    /// Travel time from p plus the first point its ray heads for (a lattice
    /// node or the root), without building the whole path.
    struct Query {
        double time;
        Point next;
    };
    Query query(const Point& p) const;

private:
    friend class RayTracer;
    ShortestPathTree() = default;

    // Best attachment of p: lattice node id, or -1 for the direct edge.
    std::pair<int, double> attach(const Point& p) const;

    const RayTracer* tracer_ = nullptr;
    Point root_ = Point::Zero();
    std::array<int, 3> root_cell_{};
    std::vector<double> dist_;
    std::vector<int> pred_;
};

/// Minimum-travel-time ray between two points.
RayPath trace_ray(const VelocityGrid& grid, const Point& from, const Point& to, int star_order,
                  int endpoint_reach = 0);

/// Origin time plus the slowness integral along a (frozen) ray.
double travel_time(const VelocityGrid& grid, const Event& event, const RayPath& ray);

/// dT/dv for each interior node touched by the ray; outer nodes are fixed
/// and never appear. Every entry is <= 0.
SparseRow velocity_jacobian_row(const VelocityGrid& grid, const RayPath& ray);

/// (dT/dx, dT/dy, dT/dz, dT/dtau) at the hypocenter.
std::array<double, 4> hypocenter_jacobian_row(const VelocityGrid& grid, const Event& event, const RayPath& ray);

} // namespace letomo
