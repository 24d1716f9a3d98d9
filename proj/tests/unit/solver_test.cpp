#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "letomo/errors.hpp"
#include "letomo/solver.hpp"
#include "oracle.hpp"

using namespace letomo;

namespace {

GridShape small()
{
    GridShape s;
    s.nx = 3;
    s.ny = 3;
    s.nz = 6;
    return s;
}

// Under-determined random data so the penalty matters.
SeparatedQuadratic random_quadratic(const GridShape& s, std::uint64_t seed, double eps_v = 0.01)
{
    const Eigen::Index n = static_cast<Eigen::Index>(s.nx) * s.ny * s.nz;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd b(n / 2, n);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
    Eigen::VectorXd c(b.rows());
    for (auto& x : c) x = nd(rng);
    SeparatedQuadratic l;
    l.parameter_count = static_cast<std::size_t>(n);
    l.row_count = static_cast<std::size_t>(b.rows());
    l.normal = b.transpose() * b;
    l.rhs = b.transpose() * c;
    l.constant = c.squaredNorm();
    l.v0 = Eigen::VectorXd::Constant(n, 4.0);
    l.v_init = Eigen::VectorXd::Constant(n, 4.0);
    l.eps_v = eps_v;
    return l;
}

SolverConfig tight()
{
    SolverConfig c;
    c.max_admm_iterations = 5000;
    c.primal_tol = 1e-9;
    c.dual_tol = 1e-9;
    c.lm.gradient_tol = 1e-12;
    return c;
}

RegularizerSpec spec(PenaltyKind k, double a, double b = 0.0)
{
    RegularizerSpec s;
    s.kind = k;
    s.lambda_ver = a;
    s.lambda_hor = b;
    s.lambda_lap = a;
    s.lambda_l1first = a;
    s.lambda_l1second = a;
    return s;
}

} // namespace

TEST(Admm, MatchesCertifiedOptimum)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 1);
    for (const RegularizerSpec& sp : {spec(PenaltyKind::Proposed, 2.0, 0.5), spec(PenaltyKind::Proposed, 20.0, 0.0),
                                      spec(PenaltyKind::L1First, 1.0), spec(PenaltyKind::L1Second, 3.0)}) {
        const SplitPenalty p = split_penalty(s, sp);
        const oracle::Result o = oracle::group_lasso(l, p, 1e-10, 20000);
        const SolveResult r = admm_solve(l, g, sp, tight());
        EXPECT_NEAR(r.objective, velocity_objective(l, p, r.v), 1e-9 * std::abs(r.objective));
        // The dual value bounds the optimum from below.
        const double gap = r.objective - o.dual;
        EXPECT_GE(gap, -1e-9 * std::abs(o.dual));
        EXPECT_LE(gap, 1e-6 * std::abs(o.dual)) << to_string(sp.kind);
        // Strong convexity (modulus >= eps_v) bounds each point's distance to
        // the minimizer by sqrt(gap / eps_v).
        const double bound = std::sqrt(std::max(gap, 0.0) / l.eps_v) +
                             std::sqrt(std::max(o.primal - o.dual, 0.0) / l.eps_v);
        EXPECT_LE((r.v - o.v).norm(), bound + 1e-9) << to_string(sp.kind);
    }
}

TEST(Admm, ResidualBalancingReachesSameOptimum)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 2);
    const RegularizerSpec sp = spec(PenaltyKind::Proposed, 5.0, 0.1);
    SolverConfig cfg = tight();
    cfg.residual_balancing = true;
    const SolveResult a = admm_solve(l, g, sp, cfg);
    const SolveResult b = admm_solve(l, g, sp, tight());
    EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::abs(b.objective));
}

TEST(Admm, ZeroWeightFallsBackToQuadratic)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 3);
    const SolveResult p = solve_velocity(l, g, spec(PenaltyKind::Proposed, 0.0, 0.0), tight());
    const SolveResult d = solve_velocity(l, g, spec(PenaltyKind::DLS, 0.0), tight());
    EXPECT_LT((p.v - d.v).norm(), 1e-10 * d.v.norm());
    EXPECT_EQ(p.state.iterations, 0);
}

TEST(Admm, LogAndState)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 4);
    SolverConfig cfg;
    cfg.max_admm_iterations = 7;
    cfg.primal_tol = cfg.dual_tol = 1e-14;
    const SolveResult r = admm_solve(l, g, spec(PenaltyKind::Proposed, 1.0, 0.1), cfg);
    EXPECT_EQ(r.state.iterations, 7);
    EXPECT_FALSE(r.converged);
    ASSERT_EQ(r.state.log.size(), 7u);
    for (const auto& it : r.state.log) {
        EXPECT_TRUE(std::isfinite(it.objective));
        EXPECT_GE(it.primal, 0.0);
        EXPECT_GE(it.dual, 0.0);
    }
    EXPECT_EQ(r.state.group_start.size(), static_cast<std::size_t>(s.nz - 1));
}

TEST(Admm, RejectsSmoothKinds)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 5);
    EXPECT_THROW(admm_solve(l, g, spec(PenaltyKind::L2Smooth, 1.0, 1.0), SolverConfig{}), UsageError);
    EXPECT_THROW(quadratic_solve(l, g, spec(PenaltyKind::Proposed, 1.0, 1.0), SolverConfig{}), UsageError);
}

TEST(Admm, NonFiniteInputRaisesSolverError)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    SeparatedQuadratic l = random_quadratic(s, 6);
    l.rhs[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(admm_solve(l, g, spec(PenaltyKind::Proposed, 1.0, 0.1), SolverConfig{}), SolverError);
}

TEST(QuadraticSolve, MatchesNormalEquations)
{
    const GridShape s = small();
    const VelocityGrid g(s, 4.0);
    const SeparatedQuadratic l = random_quadratic(s, 7);
    for (const RegularizerSpec& sp :
         {spec(PenaltyKind::DLS, 0.0), spec(PenaltyKind::L2Smooth, 0.7, 0.3), spec(PenaltyKind::Lap, 0.4)}) {
        const SplitPenalty p = split_penalty(s, sp);
        Eigen::MatrixXd h = l.normal;
        h.diagonal().array() += l.eps_v;
        if (p.smooth.rows() > 0) h += Eigen::MatrixXd(p.smooth).transpose() * Eigen::MatrixXd(p.smooth);
        const Eigen::VectorXd v = h.ldlt().solve(l.normal * l.v0 + l.rhs + l.eps_v * l.v_init);
        const SolveResult r = quadratic_solve(l, g, sp, SolverConfig{});
        EXPECT_LT((r.v - v).norm(), 1e-8 * v.norm()) << to_string(sp.kind);
        EXPECT_NEAR(r.objective, velocity_objective(l, p, v), 1e-8 * std::abs(r.objective));
    }
}

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.eta = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SolverConfig{};
    c.lm.factor = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
