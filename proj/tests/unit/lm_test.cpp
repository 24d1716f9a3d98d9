#include <gtest/gtest.h>

#include <random>

#include "letomo/lm.hpp"

using namespace letomo;

namespace {

DenseLeastSquares rosenbrock()
{
    return DenseLeastSquares(
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd r(2);
            r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
            return r;
        },
        [](const Eigen::VectorXd& x) {
            Eigen::MatrixXd j(2, 2);
            j << -20.0 * x[0], 10.0, -1.0, 0.0;
            return j;
        });
}

} // namespace

TEST(Lm, RosenbrockConverges)
{
    DenseLeastSquares p = rosenbrock();
    LmOptions o;
    o.max_iterations = 200;
    o.gradient_tol = 1e-12;
    const LmResult r = lm_minimize(p, Eigen::Vector2d(-1.2, 1.0), o);
    EXPECT_NEAR(r.x[0], 1.0, 1e-6);
    EXPECT_NEAR(r.x[1], 1.0, 1e-6);
    p.linearize(r.x);
    EXPECT_LT(2.0 * p.gradient().norm(), 1e-6);
}

TEST(Lm, HistoryNeverIncreases)
{
    DenseLeastSquares p = rosenbrock();
    LmOptions o;
    o.max_iterations = 200;
    const LmResult r = lm_minimize(p, Eigen::Vector2d(-1.2, 1.0), o);
    ASSERT_GE(r.history.size(), 2u);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
    EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.accepted) + 1);
    EXPECT_DOUBLE_EQ(r.cost, r.history.back());
}

TEST(Lm, QuadraticNeedsAtMostTwoSteps)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 5; ++trial) {
        const int d = 6;
        Eigen::MatrixXd a(10, d);
        for (int i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
        Eigen::VectorXd b(d);
        for (int i = 0; i < d; ++i) b[i] = n(rng);
        const Eigen::MatrixXd h = a.transpose() * a;
        QuadraticProblem q(h, b, 3.0);
        const LmResult r = lm_minimize(q, Eigen::VectorXd::Zero(d));
        const Eigen::VectorXd exact = h.ldlt().solve(b);
        EXPECT_LE(r.accepted, 2);
        EXPECT_LT((r.x - exact).norm(), 1e-8 * std::max(1.0, exact.norm()));
        EXPECT_NEAR(r.cost, 3.0 - b.dot(exact), 1e-9);
    }
}

TEST(Lm, QuadraticCostAndPrediction)
{
    Eigen::Matrix2d h;
    h << 2.0, 0.5, 0.5, 1.0;
    QuadraticProblem q(h, Eigen::Vector2d(1.0, -1.0), 0.25);
    const Eigen::Vector2d x(0.3, -0.7), d(0.1, 0.2);
    const double direct = x.dot(h * x) - 2.0 * Eigen::Vector2d(1.0, -1.0).dot(x) + 0.25;
    EXPECT_NEAR(q.cost(x), direct, 1e-14);
    q.linearize(x);
    EXPECT_NEAR(q.predicted_decrease(d), q.cost(x) - q.cost(x + d), 1e-12);
}

TEST(Lm, StartAtMinimumStops)
{
    DenseLeastSquares p = rosenbrock();
    const LmResult r = lm_minimize(p, Eigen::Vector2d(1.0, 1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.accepted, 0);
    EXPECT_EQ(r.cost, 0.0);
}
