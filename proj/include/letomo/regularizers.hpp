#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "letomo/grid.hpp"

namespace letomo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class PenaltyKind { DLS, Proposed, L2Smooth, Lap, L1First, L1Second };

std::string to_string(PenaltyKind kind);
/// Accepts the names printed by to_string; throws ConfigError otherwise.
PenaltyKind parse_penalty_kind(const std::string& name);

struct RegularizerSpec {
    PenaltyKind kind = PenaltyKind::DLS;
    double lambda_ver = 0.0; ///< Proposed and L2Smooth
    double lambda_hor = 0.0; ///< Proposed and L2Smooth
    double lambda_lap = 0.0;
    double lambda_l1first = 0.0;
    double lambda_l1second = 0.0;
    double eps_v = 1e-2; ///< velocity damping weight in D(v, h)
    double eps_h = 1e-2; ///< hypocenter damping weight in D(v, h)

    void validate() const;
};

/// Proposed: sum_z sqrt(g_z). L2Smooth: sum_z g_z. Sums run over z = 1..nz-2.
double eval_vertical_penalty(const VelocityGrid& grid, PenaltyKind kind);

/// Sum over ordered 4-adjacent pairs within each layer of squared differences,
/// so every unordered pair counts twice.
double eval_horizontal_penalty(const VelocityGrid& grid);

/// P(v) for the spec's kind.
double eval_penalty(const VelocityGrid& grid, const RegularizerSpec& spec);

/// Block soft-threshold: argmin_w 0.5 ||w - s||^2 + t ||w||_2.
Eigen::VectorXd prox_group_l2(const Eigen::VectorXd& s, double t);

// Linear operators over the interior parameter vector.

/// One row per unordered 4-adjacent pair within a layer: v_a - v_b.
SparseMatrix horizontal_difference_operator(const GridShape& shape);

/// Stacked A_z for z = 1..nz-2; rows of layer z occupy block z-1.
SparseMatrix vertical_second_difference_operator(const GridShape& shape);

/// One row per unordered 6-adjacent pair: v_a - v_b (unscaled).
SparseMatrix first_difference_operator(const GridShape& shape);

/// Spacing-scaled 7-point Laplacian, one row per interior point whose six
/// neighbours are all interior.
SparseMatrix laplacian_operator(const GridShape& shape);

/// P(v) = ||smooth v||^2 + weight * sum_g ||(coupling v)_g||_2, where group g
/// spans coupling rows [group_start[g], group_start[g+1]).
struct SplitPenalty {
    SparseMatrix smooth;
    SparseMatrix coupling;
    std::vector<int> group_start{0};
    double weight = 0.0;

    bool has_nonsmooth() const { return weight > 0.0 && coupling.rows() > 0; }
    double evaluate(const Eigen::VectorXd& v) const;
};

SplitPenalty split_penalty(const GridShape& shape, const RegularizerSpec& spec);

/// Gradient of P for the quadratic kinds (DLS, L2Smooth, Lap); usage error
/// for the others.
Eigen::VectorXd penalty_gradient(const VelocityGrid& grid, const RegularizerSpec& spec);

/// Gradient of (1/2) Omega_hor.
Eigen::VectorXd horizontal_penalty_gradient(const VelocityGrid& grid);

} // namespace letomo
