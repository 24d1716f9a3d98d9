#pragma once

#include <vector>

#include <Eigen/Core>

#include "letomo/grid.hpp"
#include "letomo/lm.hpp"
#include "letomo/regularizers.hpp"
#include "letomo/relocation.hpp"

namespace letomo {

struct SolverConfig {
    double eta = 1.0;
    int max_admm_iterations = 200;
    double primal_tol = 1e-5; ///< relative
    double dual_tol = 1e-5;   ///< relative
    bool residual_balancing = false;
    LmOptions lm;
    int outer_iterations = 5;

    void validate() const;
};

struct AdmmIteration {
    int iteration;
    double objective;
    double primal;
    double dual;
    double eta;
};

/// Auxiliary variables w = (w_g), scaled-free duals alpha and the penalty
/// weight eta. Groups follow SplitPenalty::group_start.
struct AdmmState {
    Eigen::VectorXd w;
    Eigen::VectorXd alpha;
    std::vector<int> group_start;
    double eta = 1.0;
    int iterations = 0;
    bool converged = false;
    std::vector<AdmmIteration> log;
};

struct SolveResult {
    Eigen::VectorXd v;
    double objective = 0.0; ///< l(v) + P(v)
    bool converged = false;
    int lm_steps = 0;
    AdmmState state;
};

/// l(v) + P(v) for the spec's penalty.
double velocity_objective(const SeparatedQuadratic& l, const SplitPenalty& penalty, const Eigen::VectorXd& v);

/// ADMM for the nonsmooth kinds (Proposed, L1First, L1Second). The v-step
/// minimizes l(v) + ||M v||^2 + (lambda eta / 2) ||G v - w + alpha / eta||^2
/// by Levenberg-Marquardt, the w-step applies prox_group_l2 with threshold
/// 1/eta per group, then alpha += eta (G v - w). Falls back to
/// quadratic_solve when the nonsmooth weight is zero.
SolveResult admm_solve(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                       const SolverConfig& cfg);

/// Regularized least squares for DLS, L2Smooth and Lap (and any penalty
/// with no nonsmooth part).
SolveResult quadratic_solve(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                            const SolverConfig& cfg);

/// Dispatches on the spec's kind.
SolveResult solve_velocity(const SeparatedQuadratic& l, const VelocityGrid& grid, const RegularizerSpec& spec,
                           const SolverConfig& cfg);

} // namespace letomo
