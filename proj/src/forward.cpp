#include "letomo/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "letomo/errors.hpp"
#include "letomo/parallel.hpp"

namespace letomo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int gcd3(int a, int b, int c)
{
    return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

// Appends the `count` sub-segments of a -> b to the path.
void append_edge(const VelocityGrid& grid, const Point& a, const Point& b, int count, RayPath& path)
{
    const Point d = b - a;
    if (d.norm() == 0.0) return;
    for (int k = 0; k < count; ++k) {
        const Point p0 = a + d * (static_cast<double>(k) / count);
        const Point p1 = (k + 1 == count) ? b : Point(a + d * (static_cast<double>(k + 1) / count));
        const Point mid = a + d * ((k + 0.5) / count);
        path.vertices.push_back(p1);
        path.lengths.push_back((p1 - p0).norm());
        path.weights.push_back(grid.corners(mid));
    }
}

} // namespace

double RayPath::length() const
{
    return std::accumulate(lengths.begin(), lengths.end(), 0.0);
}

RayTracer::RayTracer(const VelocityGrid& grid, int star_order, int endpoint_reach)
    : grid_(grid), order_(star_order), reach_(endpoint_reach > 0 ? endpoint_reach : 2 * star_order)
{
    if (star_order < 1 || star_order > kMaxStarOrder) throw UsageError("star_order must be 1, 2 or 3");
    if (reach_ < star_order) throw UsageError("endpoint_reach must be at least star_order");
    max_velocity_ = *std::max_element(grid_.node_values().begin(), grid_.node_values().end());

    for (int a = -order_; a <= order_; ++a)
        for (int b = -order_; b <= order_; ++b)
            for (int c = -order_; c <= order_; ++c)
                if ((a || b || c) && gcd3(a, b, c) == 1) offsets_.push_back({a, b, c});

    const int nodes = static_cast<int>(grid_.node_count());
    const int n_off = static_cast<int>(offsets_.size());
    neighbor_.assign(static_cast<std::size_t>(nodes) * n_off, -1);
    cost_.assign(neighbor_.size(), kInf);

    std::vector<int> opposite(n_off);
    for (int o = 0; o < n_off; ++o) {
        const auto& f = offsets_[o];
        for (int q = 0; q < n_off; ++q)
            if (offsets_[q][0] == -f[0] && offsets_[q][1] == -f[1] && offsets_[q][2] == -f[2]) opposite[o] = q;
    }

    // Costs are computed once per undirected edge, from the lower node id.
    parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t u) {
        const auto [i, j, k] = grid_.node_indices(static_cast<int>(u));
        const Point pu = grid_.node_position(static_cast<int>(u));
        for (int o = 0; o < n_off; ++o) {
            const int ii = i + offsets_[o][0], jj = j + offsets_[o][1], kk = k + offsets_[o][2];
            if (ii < 0 || jj < 0 || kk < 0 || ii >= grid_.padded_nx() || jj >= grid_.padded_ny() ||
                kk >= grid_.padded_nz())
                continue;
            const int v = grid_.node_id(ii, jj, kk);
            neighbor_[u * n_off + o] = v;
            if (static_cast<int>(u) < v) cost_[u * n_off + o] = edge_cost(pu, grid_.node_position(v));
        }
    });
    for (int u = 0; u < nodes; ++u)
        for (int o = 0; o < n_off; ++o) {
            const int v = neighbor_[static_cast<std::size_t>(u) * n_off + o];
            if (v >= 0 && v < u) cost_[static_cast<std::size_t>(u) * n_off + o] = cost_[static_cast<std::size_t>(v) * n_off + opposite[o]];
        }
}

int RayTracer::sample_count(const std::array<int, 3>& a, const std::array<int, 3>& b)
{
    int span = 0;
    for (int d = 0; d < 3; ++d) span = std::max(span, std::abs(a[d] - b[d]));
    return kEdgeSamples * std::max(1, (span + kMaxStarOrder - 1) / kMaxStarOrder);
}

int RayTracer::sample_count(const Point& a, const Point& b) const
{
    return sample_count(grid_.cell_of(a), grid_.cell_of(b));
}

double RayTracer::edge_cost(const Point& a, const Point& b) const
{
    return edge_cost(a, b, sample_count(a, b));
}

double RayTracer::edge_cost(const Point& a, const Point& b, int count) const
{
    const Point d = b - a;
    const double len = d.norm();
    if (len == 0.0) return 0.0;
    double slowness = 0.0;
    for (int k = 0; k < count; ++k) slowness += 1.0 / grid_.interpolate(a + d * ((k + 0.5) / count));
    return len * slowness / count;
}

void RayTracer::window(const std::array<int, 3>& cell, std::vector<int>& nodes) const
{
    nodes.clear();
    const int lo_i = std::max(0, cell[0] - (reach_ - 1)), hi_i = std::min(grid_.padded_nx() - 1, cell[0] + reach_);
    const int lo_j = std::max(0, cell[1] - (reach_ - 1)), hi_j = std::min(grid_.padded_ny() - 1, cell[1] + reach_);
    const int lo_k = std::max(0, cell[2] - (reach_ - 1)), hi_k = std::min(grid_.padded_nz() - 1, cell[2] + reach_);
    for (int k = lo_k; k <= hi_k; ++k)
        for (int j = lo_j; j <= hi_j; ++j)
            for (int i = lo_i; i <= hi_i; ++i) nodes.push_back(grid_.node_id(i, j, k));
}

bool RayTracer::directly_connected(const std::array<int, 3>& a, const std::array<int, 3>& b) const
{
    for (int d = 0; d < 3; ++d)
        if (std::abs(a[d] - b[d]) > reach_ - 1) return false;
    return true;
}

ShortestPathTree RayTracer::tree(const Point& root) const
{
    ShortestPathTree t;
    t.tracer_ = this;
    t.root_ = root;
    t.root_cell_ = grid_.cell_of(root);

    const std::size_t nodes = grid_.node_count();
    const std::size_t n_off = offsets_.size();
    t.dist_.assign(nodes, kInf);
    t.pred_.assign(nodes, -1);

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<int> start;
    window(t.root_cell_, start);
    for (int n : start) {
        const double c = edge_cost(root, grid_.node_position(n));
        if (c < t.dist_[n]) {
            t.dist_[n] = c;
            queue.emplace(c, n);
        }
    }

    std::vector<char> done(nodes, 0);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (done[u]) continue;
        done[u] = 1;
        const std::size_t base = static_cast<std::size_t>(u) * n_off;
        for (std::size_t o = 0; o < n_off; ++o) {
            const int v = neighbor_[base + o];
            if (v < 0 || done[v]) continue;
            const double nd = d + cost_[base + o];
            if (nd < t.dist_[v]) {
                t.dist_[v] = nd;
                t.pred_[v] = u;
                queue.emplace(nd, v);
            }
        }
    }
    for (std::size_t n = 0; n < nodes; ++n)
        if (!done[n]) throw ComputationError("ray graph is disconnected");
    return t;
}

std::pair<int, double> ShortestPathTree::attach(const Point& p) const
{
    const RayTracer& tr = *tracer_;
    const VelocityGrid& g = tr.grid_;
    const auto cell = g.cell_of(p);
    const int r = tr.reach_;
    const int lo_i = std::max(0, cell[0] - (r - 1)), hi_i = std::min(g.padded_nx() - 1, cell[0] + r);
    const int lo_j = std::max(0, cell[1] - (r - 1)), hi_j = std::min(g.padded_ny() - 1, cell[1] + r);
    const int lo_k = std::max(0, cell[2] - (r - 1)), hi_k = std::min(g.padded_nz() - 1, cell[2] + r);
    const auto& xs = g.axis_x();
    const auto& ys = g.axis_y();
    const auto& zs = g.axis_z();
    const double inv_vmax = 1.0 / tr.max_velocity_;

    // Window nodes in id order; a candidate is skipped when a lower bound on
    // its time (interpolated slowness >= 1 / max node velocity) cannot win.
    int best = -2;
    double best_time = kInf;
    for (int k = lo_k; k <= hi_k; ++k)
        for (int j = lo_j; j <= hi_j; ++j)
            for (int i = lo_i; i <= hi_i; ++i) {
                const int n = g.node_id(i, j, k);
                const Point q(xs[i], ys[j], zs[k]);
                if (dist_[n] + (q - p).norm() * inv_vmax >= best_time) continue;
                const std::array<int, 3> nc{std::min(i, g.padded_nx() - 2), std::min(j, g.padded_ny() - 2),
                                            std::min(k, g.padded_nz() - 2)};
                const double t = dist_[n] + tr.edge_cost(p, q, RayTracer::sample_count(cell, nc));
                if (t < best_time) {
                    best_time = t;
                    best = n;
                }
            }
    if (tr.directly_connected(cell, root_cell_)) {
        const double t = tr.edge_cost(p, root_);
        if (t < best_time) {
            best_time = t;
            best = -1;
        }
    }
    return {best, best_time};
}

double ShortestPathTree::time_to(const Point& p) const
{
    return attach(p).second;
}

ShortestPathTree::Query ShortestPathTree::query(const Point& p) const
{
    auto [node, time] = attach(p);
    // Skip nodes that coincide with p, as path_from does.
    while (node >= 0 && tracer_->grid_.node_position(node) == p) node = pred_[node];
    return {time, node >= 0 ? tracer_->grid_.node_position(node) : root_};
}

RayPath ShortestPathTree::path_from(const Point& p) const
{
    const VelocityGrid& grid = tracer_->grid_;
    const auto [first, time] = attach(p);
    (void)time;

    std::vector<Point> nodes{p};
    for (int n = first; n >= 0; n = pred_[n]) nodes.push_back(grid.node_position(n));
    nodes.push_back(root_);

    RayPath path;
    path.vertices.push_back(p);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        append_edge(grid, nodes[i], nodes[i + 1], tracer_->sample_count(nodes[i], nodes[i + 1]), path);
    return path;
}

RayPath trace_ray(const VelocityGrid& grid, const Point& from, const Point& to, int star_order, int endpoint_reach)
{
    grid.cell_of(from);
    grid.cell_of(to);
    RayTracer tracer(grid, star_order, endpoint_reach);
    return tracer.tree(to).path_from(from);
}

namespace {

double velocity_at(const VelocityGrid& grid, const std::array<Corner, 8>& corners)
{
    double v = 0.0;
    for (const Corner& c : corners) v += c.weight * grid.node_value(c.node);
    return v;
}

} // namespace

double travel_time(const VelocityGrid& grid, const Event& event, const RayPath& ray)
{
    double t = 0.0;
    for (std::size_t s = 0; s < ray.segment_count(); ++s) t += ray.lengths[s] / velocity_at(grid, ray.weights[s]);
    return event.origin_time + t;
}

SparseRow velocity_jacobian_row(const VelocityGrid& grid, const RayPath& ray)
{
    SparseRow raw;
    raw.reserve(ray.segment_count() * 8);
    for (std::size_t s = 0; s < ray.segment_count(); ++s) {
        const double v = velocity_at(grid, ray.weights[s]);
        const double scale = -ray.lengths[s] / (v * v);
        for (const Corner& c : ray.weights[s]) {
            if (c.weight == 0.0) continue;
            const long param = grid.node_parameter(c.node);
            if (param >= 0) raw.emplace_back(static_cast<std::size_t>(param), scale * c.weight);
        }
    }
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseRow row;
    for (const auto& e : raw) {
        if (!row.empty() && row.back().first == e.first)
            row.back().second += e.second;
        else
            row.push_back(e);
    }
    return row;
}

std::array<double, 4> hypocenter_jacobian_row(const VelocityGrid& grid, const Event& event, const RayPath& ray)
{
    if (ray.segment_count() == 0 || ray.vertices.size() < 2) throw ComputationError("ray has no segments");
    const Point d = ray.vertices[1] - ray.vertices[0];
    const double len = d.norm();
    if (!(len > 0.0)) throw ComputationError("first ray segment has zero length");
    const Point u = d / len;
    const double slowness = 1.0 / grid.interpolate(event.position);
    return {-u.x() * slowness, -u.y() * slowness, -u.z() * slowness, 1.0};
}

} // namespace letomo
