#include "letomo/lm.hpp"

#include <cmath>

namespace letomo {

namespace {

Eigen::VectorXd marquardt_diag(const Eigen::MatrixXd& h)
{
    Eigen::VectorXd d = h.diagonal();
    const double floor = 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(d[i], floor);
    return d;
}

} // namespace

LmResult lm_minimize(LmProblem& problem, const Eigen::VectorXd& x0, const LmOptions& options)
{
    LmResult out;
    out.x = x0;
    out.cost = problem.cost(x0);
    out.history.push_back(out.cost);

    double mu = options.mu0;
    bool relinearize = true;
    while (out.iterations < options.max_iterations) {
        if (relinearize) {
            problem.linearize(out.x);
            relinearize = false;
            if (2.0 * problem.gradient().norm() < options.gradient_tol * std::max(1.0, out.cost)) {
                out.converged = true;
                break;
            }
        }
        ++out.iterations;
        const Eigen::VectorXd step = problem.solve_damped(mu);
        if (!step.allFinite()) {
            mu = std::max(options.mu0, mu * options.factor);
            continue;
        }
        const Eigen::VectorXd trial = out.x + step;
        const double trial_cost = problem.cost(trial);
        const double predicted = problem.predicted_decrease(step);
        const double actual = out.cost - trial_cost;

        if (std::isfinite(trial_cost) && actual > 0.0) {
            out.x = trial;
            out.cost = trial_cost;
            out.history.push_back(trial_cost);
            ++out.accepted;
            relinearize = true;
            const double rho = predicted > 0.0 ? actual / predicted : 0.0;
            if (std::abs(rho - 1.0) < 1e-6)
                mu = 0.0;
            else if (rho > 0.75)
                mu /= options.factor;
            else if (rho < 0.25)
                mu *= options.factor;
            if (step.norm() < options.step_tol * (1.0 + out.x.norm())) {
                out.converged = true;
                break;
            }
        } else {
            // Nothing left to gain within rounding of the cost.
            if (std::abs(predicted) <= 1e-14 * std::max(1.0, out.cost) || step.norm() < options.step_tol) {
                out.converged = true;
                break;
            }
            mu = mu == 0.0 ? options.mu0 : mu * options.factor;
        }
    }
    return out;
}

void DenseLeastSquares::linearize(const Eigen::VectorXd& x)
{
    const Eigen::VectorXd r = residual_(x);
    const Eigen::MatrixXd j = jacobian_(x);
    h_ = j.transpose() * j;
    g_ = j.transpose() * r;
}

Eigen::VectorXd DenseLeastSquares::solve_damped(double mu)
{
    Eigen::MatrixXd a = h_;
    a.diagonal() += mu * marquardt_diag(h_);
    return a.ldlt().solve(-g_);
}

double DenseLeastSquares::predicted_decrease(const Eigen::VectorXd& d) const
{
    return -2.0 * g_.dot(d) - d.dot(h_ * d);
}

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd h, Eigen::VectorXd b, double c)
    : h_(std::move(h)), b_(std::move(b)), c_(c)
{
    diag_ = marquardt_diag(h_);
}

void QuadraticProblem::set_linear(Eigen::VectorXd b, double c)
{
    b_ = std::move(b);
    c_ = c;
}

double QuadraticProblem::cost(const Eigen::VectorXd& x)
{
    return x.dot(h_ * x) - 2.0 * b_.dot(x) + c_;
}

void QuadraticProblem::linearize(const Eigen::VectorXd& x)
{
    g_ = h_ * x - b_;
}

Eigen::VectorXd QuadraticProblem::solve_damped(double mu)
{
    auto it = factors_.find(mu);
    if (it == factors_.end()) {
        Eigen::MatrixXd a = h_;
        a.diagonal() += mu * diag_;
        it = factors_.emplace(mu, a.ldlt()).first;
    }
    if (it->second.info() != Eigen::Success) return Eigen::VectorXd::Constant(g_.size(), NAN);
    return it->second.solve(-g_);
}

double QuadraticProblem::predicted_decrease(const Eigen::VectorXd& d) const
{
    return -2.0 * g_.dot(d) - d.dot(h_ * d);
}

} // namespace letomo
