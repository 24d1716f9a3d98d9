#include "letomo/solver.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "letomo/errors.hpp"

namespace letomo {

namespace {

// Quadratic part l(v) + ||M v||^2 in the form v^T H v - 2 b^T v + c.
struct QuadraticForm {
    Eigen::MatrixXd h;
    Eigen::VectorXd b;
    double c = 0.0;
};

QuadraticForm base_form(const SeparatedQuadratic& l, const SplitPenalty& p)
{
    QuadraticForm q;
    q.h = l.normal;
    q.h.diagonal().array() += l.eps_v;
    if (p.smooth.rows() > 0) q.h += Eigen::MatrixXd(p.smooth.transpose() * p.smooth);
    const Eigen::VectorXd nv0 = l.normal * l.v0;
    q.b = nv0 + l.rhs + l.eps_v * l.v_init;
    q.c = l.v0.dot(nv0) + 2.0 * l.v0.dot(l.rhs) + l.constant + l.eps_v * l.v_init.squaredNorm();
    return q;
}

void check_shape(const SeparatedQuadratic& l, const VelocityGrid& grid)
{
    if (l.parameter_count != grid.parameter_count() || static_cast<std::size_t>(l.v0.size()) != l.parameter_count)
        throw UsageError("separated quadratic does not match the grid");
}

std::string dump(const AdmmState& st)
{
    std::ostringstream os;
    const std::size_t from = st.log.size() > 5 ? st.log.size() - 5 : 0;
    for (std::size_t k = from; k < st.log.size(); ++k) {
        const AdmmIteration& it = st.log[k];
        os << "\n  iter " << it.iteration << " objective " << it.objective << " primal " << it.primal << " dual "
           << it.dual << " eta " << it.eta;
    }
    return os.str();
}

} // namespace

void SolverConfig::validate() const
{
    if (!(eta > 0.0) || max_admm_iterations < 1 || !(primal_tol > 0.0) || !(dual_tol > 0.0) || !(lm.mu0 > 0.0) ||
        !(lm.factor > 1.0) || lm.max_iterations < 1 || outer_iterations < 1)
        throw ConfigError("solver settings must be positive (and the LM factor > 1)");
}

double velocity_objective(const SeparatedQuadratic& l, const SplitPenalty& penalty, const Eigen::VectorXd& v)
{
    return l.value(v) + penalty.evaluate(v);
}

SolveResult quadratic_solve(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                            const SolverConfig& cfg)
{
    cfg.validate();
    check_shape(l, grid);
    const SplitPenalty p = split_penalty(grid.shape(), spec);
    if (p.has_nonsmooth()) throw UsageError("quadratic_solve cannot handle penalty " + to_string(spec.kind));

    QuadraticForm q = base_form(l, p);
    QuadraticProblem problem(std::move(q.h), std::move(q.b), q.c);
    const LmResult r = lm_minimize(problem, l.v0, cfg.lm);

    SolveResult out;
    out.v = r.x;
    out.objective = velocity_objective(l, p, r.x);
    out.converged = r.converged;
    out.lm_steps = r.accepted;
    if (!std::isfinite(out.objective)) throw SolverError("non-finite objective in quadratic solve");
    return out;
}

SolveResult admm_solve(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                       const SolverConfig& cfg)
{
    if (spec.kind != PenaltyKind::Proposed && spec.kind != PenaltyKind::L1First &&
        spec.kind != PenaltyKind::L1Second)
        throw UsageError("admm_solve needs a nonsmooth penalty, got " + to_string(spec.kind));
    cfg.validate();
    check_shape(l, grid);
    const SplitPenalty p = split_penalty(grid.shape(), spec);
    if (!p.has_nonsmooth()) return quadratic_solve(l, grid, spec, cfg);

    const QuadraticForm base = base_form(l, p);
    const Eigen::MatrixXd gtg = Eigen::MatrixXd(p.coupling.transpose() * p.coupling);
    const SparseMatrix gt = p.coupling.transpose();
    const double lambda = p.weight;

    AdmmState st;
    st.eta = cfg.eta;
    st.group_start = p.group_start;
    Eigen::VectorXd v = l.v0;
    Eigen::VectorXd gv = p.coupling * v;
    st.w = gv;
    st.alpha = Eigen::VectorXd::Zero(gv.size());
    const std::size_t groups = p.group_start.size() - 1;

    auto make_problem = [&](double eta) {
        Eigen::MatrixXd h = base.h + (0.5 * lambda * eta) * gtg;
        return std::make_unique<QuadraticProblem>(std::move(h), base.b, base.c);
    };
    auto problem = make_problem(st.eta);

    SolveResult out;
    for (int it = 1; it <= cfg.max_admm_iterations; ++it) {
        const double k = 0.5 * lambda * st.eta;
        const Eigen::VectorXd s = st.w - st.alpha / st.eta;
        problem->set_linear(base.b + k * (gt * s), base.c + k * s.squaredNorm());
        const LmResult r = lm_minimize(*problem, v, cfg.lm);
        v = r.x;
        out.lm_steps += r.accepted;
        gv = p.coupling * v;

        const Eigen::VectorXd w_prev = st.w;
        const Eigen::VectorXd target = gv + st.alpha / st.eta;
        for (std::size_t g = 0; g < groups; ++g) {
            const int a = p.group_start[g], n = p.group_start[g + 1] - a;
            st.w.segment(a, n) = prox_group_l2(target.segment(a, n), 1.0 / st.eta);
        }
        st.alpha += st.eta * (gv - st.w);

        const double primal = (gv - st.w).norm();
        const double dual = st.eta * (st.w - w_prev).norm();
        const double objective = velocity_objective(l, p, v);
        st.iterations = it;
        st.log.push_back({it, objective, primal, dual, st.eta});
        if (!std::isfinite(objective) || !v.allFinite())
            throw SolverError("non-finite objective in ADMM at iteration " + std::to_string(it) + dump(st));

        const double scale = v.cwiseAbs().maxCoeff();
        const double eps_primal = cfg.primal_tol * (scale + std::max(gv.norm(), st.w.norm()));
        const double eps_dual = cfg.dual_tol * (scale + st.alpha.norm());
        if (primal <= eps_primal && dual <= eps_dual) {
            st.converged = true;
            break;
        }
        if (cfg.residual_balancing) {
            double eta = st.eta;
            if (primal > 10.0 * dual)
                eta *= 2.0;
            else if (dual > 10.0 * primal)
                eta /= 2.0;
            if (eta != st.eta) {
                st.eta = eta;
                problem = make_problem(st.eta);
            }
        }
    }

    out.v = v;
    out.objective = velocity_objective(l, p, v);
    out.converged = st.converged;
    out.state = std::move(st);
    return out;
}

SolveResult solve_velocity(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                           const SolverConfig& cfg)
{
    switch (spec.kind) {
    case PenaltyKind::Proposed:
    case PenaltyKind::L1First:
    case PenaltyKind::L1Second: return admm_solve(l, grid, spec, cfg);
    default: return quadratic_solve(l, grid, spec, cfg);
    }
}

} // namespace letomo
