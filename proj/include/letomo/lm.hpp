#pragma once

#include <functional>
#include <map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

namespace letomo {

struct LmOptions {
    double mu0 = 1e-3;
    double factor = 10.0;
    int max_iterations = 25;
    double gradient_tol = 1e-8;
    double step_tol = 1e-10;
};

struct LmResult {
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
    int accepted = 0;
    bool converged = false;
    std::vector<double> history; ///< cost after every accepted step, starting with the initial cost
};

/// Sum-of-squares objective seen by the Levenberg-Marquardt loop.
///
/// After linearize(x), gradient() is J^T r (half the cost gradient) and
/// solve_damped(mu) returns the step of (J^T J + mu diag(J^T J)) d = -J^T r.
class LmProblem {
public:
    virtual ~LmProblem() = default;
    virtual double cost(const Eigen::VectorXd& x) = 0;
    virtual void linearize(const Eigen::VectorXd& x) = 0;
    virtual const Eigen::VectorXd& gradient() const = 0;
    virtual Eigen::VectorXd solve_damped(double mu) = 0;
    /// cost(x) - model(x + d) for the current linearization.
    virtual double predicted_decrease(const Eigen::VectorXd& d) const = 0;
};

/// Marquardt-scaled LM. Accepts a step only if the cost decreases; returns the
/// best iterate seen. When the gain ratio shows the model is exact, the next
/// step is taken undamped, so a quadratic objective needs at most two accepted
/// steps.
LmResult lm_minimize(LmProblem& problem, const Eigen::VectorXd& x0, const LmOptions& options = {});

/// r(x) and J(x) supplied as callables; dense normal equations.
class DenseLeastSquares : public LmProblem {
public:
    using Residual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
    using Jacobian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

    DenseLeastSquares(Residual residual, Jacobian jacobian)
        : residual_(std::move(residual)), jacobian_(std::move(jacobian)) {}

    double cost(const Eigen::VectorXd& x) override { return residual_(x).squaredNorm(); }
    void linearize(const Eigen::VectorXd& x) override;
    const Eigen::VectorXd& gradient() const override { return g_; }
    Eigen::VectorXd solve_damped(double mu) override;
    double predicted_decrease(const Eigen::VectorXd& d) const override;

private:
    Residual residual_;
    Jacobian jacobian_;
    Eigen::MatrixXd h_;
    Eigen::VectorXd g_;
};

/// f(x) = x^T H x - 2 b^T x + c with H symmetric positive semidefinite.
/// Factorizations are cached per damping value, so repeated solves with the
/// same H (as in ADMM's v-step) reuse them.
class QuadraticProblem : public LmProblem {
public:
    QuadraticProblem(Eigen::MatrixXd h, Eigen::VectorXd b, double c);

    void set_linear(Eigen::VectorXd b, double c);
    const Eigen::MatrixXd& hessian() const { return h_; }

    double cost(const Eigen::VectorXd& x) override;
    void linearize(const Eigen::VectorXd& x) override;
    const Eigen::VectorXd& gradient() const override { return g_; }
    Eigen::VectorXd solve_damped(double mu) override;
    double predicted_decrease(const Eigen::VectorXd& d) const override;

private:
    Eigen::MatrixXd h_;
    Eigen::VectorXd b_;
    double c_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd g_;
    std::map<double, Eigen::LDLT<Eigen::MatrixXd>> factors_;
};

} // namespace letomo
