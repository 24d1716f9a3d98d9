#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "letomo/errors.hpp"
#include "letomo/relocation.hpp"

using namespace letomo;

namespace {

struct Rng {
    std::mt19937_64 gen;
    std::normal_distribution<double> n;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double operator()() { return n(gen); }
    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c)
    {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(gen);
        return m;
    }
    Eigen::VectorXd vector(Eigen::Index r) { return matrix(r, 1).col(0); }
};

LinearizedSystem random_system(std::uint64_t seed, double eps_h)
{
    Rng rng(seed);
    LinearizedSystem s;
    s.parameter_count = 8;
    s.eps_v = 0.02;
    s.eps_h = eps_h;
    s.v0 = rng.vector(8);
    s.v_init = rng.vector(8);
    const std::vector<std::vector<int>> cols{{0, 1, 2, 5}, {2, 3, 4, 6, 7}, {0, 4, 7}};
    const std::vector<int> rows{7, 9, 6};
    for (std::size_t i = 0; i < cols.size(); ++i) {
        LinearizedEvent e;
        e.event = i;
        e.columns = cols[i];
        e.jv = rng.matrix(rows[i], static_cast<Eigen::Index>(cols[i].size()));
        e.jh = rng.matrix(rows[i], 4);
        e.residual = rng.vector(rows[i]);
        s.events.push_back(e);
        s.h0.push_back(rng.vector(4));
        s.h_init.push_back(rng.vector(4));
    }
    return s;
}

// Dense least squares over (v, h_1..h_n) built straight from the model.
struct JointOracle {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;

    explicit JointOracle(const LinearizedSystem& s)
    {
        const Eigen::Index np = static_cast<Eigen::Index>(s.parameter_count);
        const Eigen::Index n = np + 4 * static_cast<Eigen::Index>(s.events.size());
        Eigen::Index rows = np;
        for (const auto& e : s.events) rows += e.jh.rows() + 4;
        a = Eigen::MatrixXd::Zero(rows, n);
        b = Eigen::VectorXd::Zero(rows);
        Eigen::Index r = 0;
        const double sv = std::sqrt(s.eps_v), sh = std::sqrt(s.eps_h);
        a.block(r, 0, np, np) = sv * Eigen::MatrixXd::Identity(np, np);
        b.segment(r, np) = sv * s.v_init;
        r += np;
        for (std::size_t i = 0; i < s.events.size(); ++i) {
            const auto& e = s.events[i];
            const Eigen::Index m = e.jh.rows(), hc = np + 4 * static_cast<Eigen::Index>(i);
            Eigen::VectorXd rhs = e.residual + e.jh * s.h0[i];
            for (std::size_t c = 0; c < e.columns.size(); ++c) {
                a.block(r, e.columns[c], m, 1) = e.jv.col(static_cast<Eigen::Index>(c));
                rhs += e.jv.col(static_cast<Eigen::Index>(c)) * s.v0[e.columns[c]];
            }
            a.block(r, hc, m, 4) = e.jh;
            b.segment(r, m) = rhs;
            r += m;
            a.block(r, hc, 4, 4) = sh * Eigen::Matrix4d::Identity();
            b.segment(r, 4) = sh * s.h_init[i];
            r += 4;
        }
    }

    Eigen::VectorXd solve() const { return a.colPivHouseholderQr().solve(b); }
};

} // namespace

TEST(Separation, ValueIsMinimumOverHypocenters)
{
    const LinearizedSystem sys = random_system(1, 0.05);
    const SeparatedQuadratic l = qr_separate(sys);
    EXPECT_TRUE(l.warnings.empty());
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd v = rng.vector(8);
        const auto dh = l.hypocenter_steps(v);
        std::vector<Eigen::Vector4d> h(dh.size());
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = sys.h0[i] + dh[i];
        const double at = sys.model(v, h);
        EXPECT_NEAR(l.value(v), at, 1e-9 * std::max(1.0, at));
        for (int k = 0; k < 4; ++k) {
            auto hp = h;
            hp[1][k] += 1e-3;
            EXPECT_GT(sys.model(v, hp), at);
        }
    }
}

TEST(Separation, MatchesDenseJointLeastSquares)
{
    for (double eps_h : {0.0, 0.05}) {
        const LinearizedSystem sys = random_system(3, eps_h);
        const SeparatedQuadratic l = qr_separate(sys);
        const Eigen::VectorXd x = JointOracle(sys).solve();
        const Eigen::VectorXd v = x.head(8);
        const auto dh = l.hypocenter_steps(v);
        for (std::size_t i = 0; i < dh.size(); ++i)
            EXPECT_LT((sys.h0[i] + dh[i] - x.segment(8 + 4 * static_cast<Eigen::Index>(i), 4)).norm(), 1e-9);
        // The separated value is quadratic; its central differences vanish at v.
        for (Eigen::Index k = 0; k < 8; ++k) {
            Eigen::VectorXd p = v, m = v;
            p[k] += 1e-3;
            m[k] -= 1e-3;
            EXPECT_NEAR((l.value(p) - l.value(m)) / 2e-3, 0.0, 1e-7);
        }
    }
}

TEST(Separation, RowCountFollowsHypocenterDamping)
{
    const LinearizedSystem damped = random_system(4, 0.05);
    EXPECT_EQ(qr_separate(damped).row_count, 7u + 9u + 6u);
    const LinearizedSystem plain = random_system(4, 0.0);
    EXPECT_EQ(qr_separate(plain).row_count, 7u + 9u + 6u - 3 * 4u);
}

TEST(Separation, RankDeficientEventIsFrozenAndReported)
{
    LinearizedSystem sys = random_system(5, 0.0);
    sys.events[2].jh.col(3).setZero();
    const SeparatedQuadratic l = qr_separate(sys);
    ASSERT_EQ(l.warnings.size(), 1u);
    EXPECT_NE(l.warnings[0].find("event 2"), std::string::npos);
    EXPECT_EQ(l.factors[2].rank, 3);
    const auto dh = l.hypocenter_steps(Eigen::VectorXd::Ones(8));
    EXPECT_EQ(dh[2][3], 0.0);
    EXPECT_TRUE(std::isfinite(l.value(Eigen::VectorXd::Ones(8))));
}

TEST(Linearization, HypocenterTaylorRemainderIsSecondOrder)
{
    GridShape s;
    s.nx = s.ny = s.nz = 6;
    s.dx = s.dy = s.dz = 2.0;
    const VelocityGrid g(s, 5.0);
    const Point station(9.0, 8.5, 0.5);
    const Event e{"e", Point(4.0, 3.0, 6.0), 1.5};
    const RayPath ray = trace_ray(g, e.position, station, 3);
    const auto j = hypocenter_jacobian_row(g, e, ray);
    const double t0 = travel_time(g, e, ray);
    const Eigen::Vector4d dir = Eigen::Vector4d(0.6, -0.3, 0.7, 0.2).normalized();
    auto remainder = [&](double step) {
        Event moved = e;
        moved.position += step * dir.head<3>();
        moved.origin_time += step * dir[3];
        const double t = travel_time(g, moved, trace_ray(g, moved.position, station, 3));
        double lin = t0;
        for (int k = 0; k < 4; ++k) lin += step * j[k] * dir[k];
        return std::abs(t - lin);
    };
    const double r1 = remainder(0.2), r2 = remainder(0.1), r3 = remainder(0.05);
    EXPECT_GT(r1, 0.0);
    EXPECT_NEAR(r2 / r1, 0.25, 0.05);
    EXPECT_NEAR(r3 / r2, 0.25, 0.05);
}

namespace {

struct Scene {
    VelocityGrid grid;
    std::vector<Station> stations;
    Event truth;
    std::vector<Pick> picks;
};

Scene scene()
{
    GridShape s;
    s.nx = s.ny = 6;
    s.nz = 8;
    s.dx = s.dy = 4.0;
    s.dz = 2.0;
    Scene sc{VelocityGrid(s, 5.0), {}, Event{"e", Point(9.0, 11.0, 7.0), 2.0}, {}};
    int k = 0;
    for (double x : {0.5, 10.0, 19.5})
        for (double y : {0.5, 10.0, 19.5}) sc.stations.push_back(Station{"s" + std::to_string(k++), Point(x, y, 0.2)});
    const StationTrees trees(sc.grid, sc.stations, 3);
    for (std::size_t i = 0; i < sc.stations.size(); ++i)
        sc.picks.push_back(Pick{i, sc.truth.origin_time + trees.tree(i).time_to(sc.truth.position)});
    return sc;
}

} // namespace

TEST(Relocation, RecoversShiftedEvent)
{
    const Scene sc = scene();
    const StationTrees trees(sc.grid, sc.stations, 3);
    Event start = sc.truth;
    start.position += Point(2.0, -1.5, 1.5);
    start.origin_time -= 0.3;
    RelocationOptions o;
    o.max_iterations = 30;
    const RelocationOutcome r = relocate_event(trees, start, sc.picks, o);
    EXPECT_TRUE(r.relocatable);
    EXPECT_LT(r.rss_after, r.rss_before);
    EXPECT_NEAR(r.rss_before, event_rss(trees, start, sc.picks), 1e-12);
    EXPECT_LT((r.event.position - sc.truth.position).norm(), 0.1);
    EXPECT_NEAR(r.event.origin_time, sc.truth.origin_time, 0.02);
}

TEST(Relocation, StepsAreClippedPerAxis)
{
    const Scene sc = scene();
    const StationTrees trees(sc.grid, sc.stations, 3);
    Event start = sc.truth;
    start.position += Point(6.0, 0.0, 0.0);
    RelocationOptions o;
    o.max_iterations = 1;
    o.step_cells = 0.5;
    const RelocationOutcome r = relocate_event(trees, start, sc.picks, o);
    EXPECT_LE(std::abs(r.event.position.x() - start.position.x()), 0.5 * 4.0 + 1e-12);
    EXPECT_LE(std::abs(r.event.position.z() - start.position.z()), 0.5 * 2.0 + 1e-12);
}

TEST(Relocation, NeverIncreasesRss)
{
    const Scene sc = scene();
    const StationTrees trees(sc.grid, sc.stations, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 5; ++t) {
        Event start = sc.truth;
        start.position += Point(u(rng), u(rng), 0.5 * u(rng));
        std::vector<Pick> picks = sc.picks;
        for (auto& p : picks) p.time += 0.05 * u(rng);
        const RelocationOutcome r = relocate_event(trees, start, picks);
        EXPECT_LE(r.rss_after, r.rss_before);
        EXPECT_GE(r.event.position.z(), 0.0);
    }
}
