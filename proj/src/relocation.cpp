#include "letomo/relocation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "letomo/errors.hpp"
#include "letomo/parallel.hpp"

namespace letomo {

Eigen::Vector4d hypocenter_vector(const Event& e)
{
    return {e.position.x(), e.position.y(), e.position.z(), e.origin_time};
}

double LinearizedSystem::model(const Eigen::VectorXd& v, const std::vector<Eigen::Vector4d>& h) const
{
    const Eigen::VectorXd dv = v - v0;
    double sum = eps_v * (v - v_init).squaredNorm();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const LinearizedEvent& e = events[i];
        Eigen::VectorXd d(e.columns.size());
        for (std::size_t c = 0; c < e.columns.size(); ++c) d[c] = dv[e.columns[c]];
        sum += (e.jv * d + e.jh * (h[i] - h0[i]) - e.residual).squaredNorm();
        sum += eps_h * (h[i] - h_init[i]).squaredNorm();
    }
    return sum;
}

LinearizedSystem build_linearized_system(const VelocityGrid& grid, const std::vector<Event>& events,
                                         const std::vector<Event>& initial_events,
                                         const std::vector<Station>& stations, std::span<const Arrival> arrivals,
                                         const std::vector<RayPath>& rays, const Eigen::VectorXd& v_init,
                                         const RegularizerSpec& spec)
{
    if (rays.size() != arrivals.size()) throw UsageError("need exactly one ray per arrival");
    if (initial_events.size() != events.size()) throw UsageError("initial and current event lists differ in size");
    if (static_cast<std::size_t>(v_init.size()) != grid.parameter_count())
        throw UsageError("v_init has the wrong length");

    std::map<std::size_t, std::vector<std::size_t>> by_event;
    for (std::size_t k = 0; k < arrivals.size(); ++k) {
        const Arrival& a = arrivals[k];
        if (a.event >= events.size() || a.station >= stations.size()) {
            std::ostringstream os;
            os << "arrival " << k << " refers to unknown " << (a.event >= events.size() ? "event " : "station ")
               << (a.event >= events.size() ? a.event : a.station);
            throw DataError(os.str());
        }
        by_event[a.event].push_back(k);
    }

    LinearizedSystem sys;
    sys.parameter_count = grid.parameter_count();
    sys.v0 = grid.interior();
    sys.v_init = v_init;
    sys.eps_v = spec.eps_v;
    sys.eps_h = spec.eps_h;
    for (const auto& [ev, list] : by_event) {
        LinearizedEvent le;
        le.event = ev;
        le.arrivals = list;
        sys.events.push_back(std::move(le));
        sys.h0.push_back(hypocenter_vector(events[ev]));
        sys.h_init.push_back(hypocenter_vector(initial_events[ev]));
    }

    parallel_for(sys.events.size(), [&](std::size_t i) {
        LinearizedEvent& le = sys.events[i];
        const Event& event = events[le.event];
        const std::size_t n = le.arrivals.size();
        std::vector<SparseRow> rows(n);
        le.jh.resize(static_cast<Eigen::Index>(n), 4);
        le.residual.resize(static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t k = le.arrivals[r];
            le.residual[r] = arrivals[k].time - travel_time(grid, event, rays[k]);
            rows[r] = velocity_jacobian_row(grid, rays[k]);
            const auto h = hypocenter_jacobian_row(grid, event, rays[k]);
            for (int c = 0; c < 4; ++c) le.jh(r, c) = h[c];
            for (const auto& [p, _] : rows[r]) le.columns.push_back(static_cast<int>(p));
        }
        std::sort(le.columns.begin(), le.columns.end());
        le.columns.erase(std::unique(le.columns.begin(), le.columns.end()), le.columns.end());
        le.jv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(le.columns.size()));
        for (std::size_t r = 0; r < n; ++r)
            for (const auto& [p, d] : rows[r]) {
                const auto c = std::lower_bound(le.columns.begin(), le.columns.end(), static_cast<int>(p)) -
                               le.columns.begin();
                le.jv(r, c) += d;
            }
    });
    return sys;
}

double SeparatedQuadratic::value(const Eigen::VectorXd& v) const
{
    const Eigen::VectorXd d = v - v0;
    return d.dot(normal * d) - 2.0 * d.dot(rhs) + constant + eps_v * (v - v_init).squaredNorm();
}

std::vector<Eigen::Vector4d> SeparatedQuadratic::hypocenter_steps(const Eigen::VectorXd& v) const
{
    const Eigen::VectorXd dv = v - v0;
    std::vector<Eigen::Vector4d> out(factors.size(), Eigen::Vector4d::Zero());
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const EventFactor& f = factors[i];
        if (f.rank == 0) continue;
        Eigen::VectorXd d(f.columns.size());
        for (std::size_t c = 0; c < f.columns.size(); ++c) d[c] = dv[f.columns[c]];
        const Eigen::VectorXd t = f.q1_rhs - f.q1_jv * d;
        const Eigen::VectorXd u = f.r.triangularView<Eigen::Upper>().solve(t);
        for (int k = 0; k < f.rank; ++k) out[i][f.permutation[k]] = u[k];
    }
    return out;
}

SeparatedQuadratic qr_separate(const LinearizedSystem& sys)
{
    struct Block {
        EventFactor factor;
        Eigen::MatrixXd b;
        Eigen::VectorXd c;
        std::string warning;
    };
    const double sq_eps_h = std::sqrt(sys.eps_h);
    const int damping_rows = sys.eps_h > 0.0 ? 4 : 0;

    std::vector<Block> blocks(sys.events.size());
    parallel_for(sys.events.size(), [&](std::size_t i) {
        const LinearizedEvent& e = sys.events[i];
        const Eigen::Index n = e.jh.rows();
        const Eigen::Index m = n + damping_rows;
        const auto cols = static_cast<Eigen::Index>(e.columns.size());

        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, 4);
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m, cols);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
        k.topRows(n) = e.jh;
        v.topRows(n) = e.jv;
        y.head(n) = e.residual;
        if (damping_rows) {
            k.bottomRows(4) = sq_eps_h * Eigen::Matrix4d::Identity();
            y.tail(4) = -sq_eps_h * (sys.h0[i] - sys.h_init[i]);
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(k);
        qr.setThreshold(1e-10);
        const int rank = static_cast<int>(qr.rank());
        const Eigen::MatrixXd qv = qr.householderQ().transpose() * v;
        const Eigen::VectorXd qy = qr.householderQ().transpose() * y;

        Block& blk = blocks[i];
        EventFactor& f = blk.factor;
        f.event = e.event;
        f.rank = rank;
        f.r = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
        f.permutation = qr.colsPermutation().indices();
        f.q1_rhs = qy.head(rank);
        f.q1_jv = qv.topRows(rank);
        f.columns = e.columns;
        blk.b = qv.bottomRows(m - rank);
        blk.c = qy.tail(m - rank);
        if (rank < 4) {
            std::ostringstream os;
            os << "event " << e.event << ": hypocenter block has rank " << rank << " < 4; " << 4 - rank
               << " direction(s) frozen this iteration";
            blk.warning = os.str();
        }
    });

    SeparatedQuadratic out;
    out.parameter_count = sys.parameter_count;
    const auto np = static_cast<Eigen::Index>(sys.parameter_count);
    out.normal = Eigen::MatrixXd::Zero(np, np);
    out.rhs = Eigen::VectorXd::Zero(np);
    out.v0 = sys.v0;
    out.v_init = sys.v_init;
    out.eps_v = sys.eps_v;
    for (Block& blk : blocks) {
        const auto& cols = blk.factor.columns;
        const Eigen::MatrixXd btb = blk.b.transpose() * blk.b;
        const Eigen::VectorXd btc = blk.b.transpose() * blk.c;
        for (std::size_t a = 0; a < cols.size(); ++a) {
            out.rhs[cols[a]] += btc[a];
            for (std::size_t b = 0; b < cols.size(); ++b) out.normal(cols[a], cols[b]) += btb(a, b);
        }
        out.constant += blk.c.squaredNorm();
        out.row_count += static_cast<std::size_t>(blk.b.rows());
        if (!blk.warning.empty()) out.warnings.push_back(blk.warning);
        out.factors.push_back(std::move(blk.factor));
    }
    return out;
}

StationTrees::StationTrees(const VelocityGrid& grid, const std::vector<Station>& stations, int star_order,
                           const std::vector<bool>& needed)
    : tracer_(std::make_unique<RayTracer>(grid, star_order)), trees_(stations.size())
{
    if (!needed.empty() && needed.size() != stations.size()) throw UsageError("needed mask has the wrong length");
    parallel_for(stations.size(), [&](std::size_t s) {
        if (needed.empty() || needed[s]) trees_[s] = tracer_->tree(stations[s].position);
    });
}

const ShortestPathTree& StationTrees::tree(std::size_t station) const
{
    if (station >= trees_.size() || !trees_[station]) {
        std::ostringstream os;
        os << "no ray tree for station " << station;
        throw UsageError(os.str());
    }
    return *trees_[station];
}

double event_rss(const StationTrees& trees, const Event& event, const std::vector<Pick>& picks)
{
    double sum = 0.0;
    for (const Pick& p : picks) {
        const double r = p.time - event.origin_time - trees.tree(p.station).time_to(event.position);
        sum += r * r;
    }
    return sum;
}

RelocationOutcome relocate_event(const StationTrees& trees, const Event& event, const std::vector<Pick>& picks,
                                 const RelocationOptions& options)
{
    RelocationOutcome out;
    out.event = event;
    out.rss_before = event_rss(trees, event, picks);
    out.rss_after = out.rss_before;
    if (picks.size() < 4) {
        out.relocatable = false;
        return out;
    }

    const VelocityGrid& grid = trees.tracer().grid();
    const GridShape& shape = grid.shape();
    const double cell[3] = {shape.dx, shape.dy, shape.dz};
    const double lo[3] = {grid.axis_x().front(), grid.axis_y().front(), std::max(0.0, grid.axis_z().front())};
    const double hi[3] = {grid.axis_x().back(), grid.axis_y().back(), grid.axis_z().back()};

    const auto n = static_cast<Eigen::Index>(picks.size());
    double mu = options.mu0;
    bool relinearize = true;
    int rejected = 0;
    Eigen::MatrixXd jtj(4, 4);
    Eigen::Vector4d jtr;
    while (out.iterations < options.max_iterations) {
        if (relinearize) {
            Eigen::MatrixXd j(n, 4);
            Eigen::VectorXd r(n);
            const double slowness = 1.0 / grid.interpolate(out.event.position);
            for (Eigen::Index k = 0; k < n; ++k) {
                const auto q = trees.tree(picks[k].station).query(out.event.position);
                r[k] = picks[k].time - out.event.origin_time - q.time;
                const Point d = q.next - out.event.position;
                const double len = d.norm();
                const Point u = len > 0.0 ? Point(d / len) : Point::Zero();
                j.row(k) << -u.x() * slowness, -u.y() * slowness, -u.z() * slowness, 1.0;
            }
            jtj = j.transpose() * j;
            jtr = j.transpose() * r;
            relinearize = false;
        }
        ++out.iterations;

        Eigen::Matrix4d a = jtj;
        for (int c = 0; c < 4; ++c) a(c, c) += mu * std::max(jtj(c, c), 1e-12);
        Eigen::Vector4d step = a.ldlt().solve(jtr);
        if (!step.allFinite()) {
            mu *= 10.0;
            continue;
        }
        double scale = 1.0;
        for (int c = 0; c < 3; ++c)
            if (std::abs(step[c]) > options.step_cells * cell[c])
                scale = std::min(scale, options.step_cells * cell[c] / std::abs(step[c]));
        step *= scale;

        Event trial = out.event;
        for (int c = 0; c < 3; ++c) trial.position[c] = std::clamp(trial.position[c] + step[c], lo[c], hi[c]);
        trial.origin_time += step[3];
        const double rss = event_rss(trees, trial, picks);
        if (rss < out.rss_after) {
            rejected = 0;
            const double gain = out.rss_after - rss;
            out.event = trial;
            out.rss_after = rss;
            mu = std::max(mu / 10.0, 1e-12);
            relinearize = true;
            if (step.head<3>().norm() < options.position_tol || gain <= options.rss_tol * rss) break;
        } else {
            mu *= 10.0;
            if (step.head<3>().norm() < options.position_tol || ++rejected == 3) break;
            continue;
        }
    }
    return out;
}

} // namespace letomo
