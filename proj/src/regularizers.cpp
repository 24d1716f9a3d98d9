#include "letomo/regularizers.hpp"

#include <cmath>
#include <sstream>

#include "letomo/errors.hpp"

namespace letomo {

namespace {

using Triplet = Eigen::Triplet<double>;

std::size_t index(const GridShape& s, int x, int y, int z)
{
    return (static_cast<std::size_t>(z) * s.nx + x) * s.ny + y;
}

std::size_t parameter_count(const GridShape& s)
{
    return static_cast<std::size_t>(s.nx) * s.ny * s.nz;
}

SparseMatrix build(int rows, const GridShape& s, const std::vector<Triplet>& t)
{
    SparseMatrix m(rows, static_cast<Eigen::Index>(parameter_count(s)));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

double laplacian_at(const VelocityGrid& g, int x, int y, int z)
{
    const GridShape& s = g.shape();
    const double c = g.at(x, y, z);
    return (g.at(x - 1, y, z) - 2.0 * c + g.at(x + 1, y, z)) / (s.dx * s.dx) +
           (g.at(x, y - 1, z) - 2.0 * c + g.at(x, y + 1, z)) / (s.dy * s.dy) +
           (g.at(x, y, z - 1) - 2.0 * c + g.at(x, y, z + 1)) / (s.dz * s.dz);
}

void require_nonnegative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be nonnegative and finite, got " << v;
        throw ConfigError(os.str());
    }
}

} // namespace

std::string to_string(PenaltyKind kind)
{
    switch (kind) {
    case PenaltyKind::DLS: return "DLS";
    case PenaltyKind::Proposed: return "Proposed";
    case PenaltyKind::L2Smooth: return "L2Smooth";
    case PenaltyKind::Lap: return "Lap";
    case PenaltyKind::L1First: return "L1First";
    case PenaltyKind::L1Second: return "L1Second";
    }
    return "?";
}

PenaltyKind parse_penalty_kind(const std::string& name)
{
    for (auto k : {PenaltyKind::DLS, PenaltyKind::Proposed, PenaltyKind::L2Smooth, PenaltyKind::Lap,
                   PenaltyKind::L1First, PenaltyKind::L1Second})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown regularizer kind '" + name + "'");
}

void RegularizerSpec::validate() const
{
    require_nonnegative(lambda_ver, "lambda_ver");
    require_nonnegative(lambda_hor, "lambda_hor");
    require_nonnegative(lambda_lap, "lambda_lap");
    require_nonnegative(lambda_l1first, "lambda_l1first");
    require_nonnegative(lambda_l1second, "lambda_l1second");
    require_nonnegative(eps_v, "eps_v");
    require_nonnegative(eps_h, "eps_h");
}

double eval_vertical_penalty(const VelocityGrid& grid, PenaltyKind kind)
{
    if (kind != PenaltyKind::Proposed && kind != PenaltyKind::L2Smooth)
        throw UsageError("vertical penalty is defined for Proposed and L2Smooth only, not " + to_string(kind));
    double sum = 0.0;
    for (int z = 1; z + 1 < grid.nz(); ++z) {
        const double g = second_difference_gz(grid, z);
        sum += kind == PenaltyKind::Proposed ? std::sqrt(g) : g;
    }
    return sum;
}

double eval_horizontal_penalty(const VelocityGrid& grid)
{
    static constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    double sum = 0.0;
    for (int z = 0; z < grid.nz(); ++z)
        for (int x = 0; x < grid.nx(); ++x)
            for (int y = 0; y < grid.ny(); ++y)
                for (const auto& st : kSteps) {
                    const int xx = x + st[0], yy = y + st[1];
                    if (xx < 0 || yy < 0 || xx >= grid.nx() || yy >= grid.ny()) continue;
                    const double d = grid.at(x, y, z) - grid.at(xx, yy, z);
                    sum += d * d;
                }
    return sum;
}

double eval_penalty(const VelocityGrid& grid, const RegularizerSpec& spec)
{
    switch (spec.kind) {
    case PenaltyKind::DLS: return 0.0;
    case PenaltyKind::Proposed:
    case PenaltyKind::L2Smooth:
        return spec.lambda_ver * eval_vertical_penalty(grid, spec.kind) +
               0.5 * spec.lambda_hor * eval_horizontal_penalty(grid);
    case PenaltyKind::Lap:
    case PenaltyKind::L1Second: {
        double sum = 0.0;
        for (int z = 1; z + 1 < grid.nz(); ++z)
            for (int x = 1; x + 1 < grid.nx(); ++x)
                for (int y = 1; y + 1 < grid.ny(); ++y) {
                    const double l = laplacian_at(grid, x, y, z);
                    sum += spec.kind == PenaltyKind::Lap ? l * l : std::abs(l);
                }
        return (spec.kind == PenaltyKind::Lap ? spec.lambda_lap : spec.lambda_l1second) * sum;
    }
    case PenaltyKind::L1First: {
        static constexpr int kSteps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        double sum = 0.0;
        for (int z = 0; z < grid.nz(); ++z)
            for (int x = 0; x < grid.nx(); ++x)
                for (int y = 0; y < grid.ny(); ++y)
                    for (const auto& st : kSteps) {
                        const int xx = x + st[0], yy = y + st[1], zz = z + st[2];
                        if (xx < 0 || yy < 0 || zz < 0 || xx >= grid.nx() || yy >= grid.ny() || zz >= grid.nz())
                            continue;
                        sum += std::abs(grid.at(x, y, z) - grid.at(xx, yy, zz));
                    }
        return spec.lambda_l1first * sum;
    }
    }
    return 0.0;
}

Eigen::VectorXd prox_group_l2(const Eigen::VectorXd& s, double t)
{
    if (!(t >= 0.0)) throw UsageError("prox threshold must be nonnegative");
    const double n = s.norm();
    if (n <= t) return Eigen::VectorXd::Zero(s.size());
    return (1.0 - t / n) * s;
}

SparseMatrix horizontal_difference_operator(const GridShape& s)
{
    std::vector<Triplet> t;
    int row = 0;
    for (int z = 0; z < s.nz; ++z)
        for (int x = 0; x < s.nx; ++x)
            for (int y = 0; y < s.ny; ++y) {
                if (x + 1 < s.nx) {
                    t.emplace_back(row, index(s, x, y, z), 1.0);
                    t.emplace_back(row++, index(s, x + 1, y, z), -1.0);
                }
                if (y + 1 < s.ny) {
                    t.emplace_back(row, index(s, x, y, z), 1.0);
                    t.emplace_back(row++, index(s, x, y + 1, z), -1.0);
                }
            }
    return build(row, s, t);
}

SparseMatrix vertical_second_difference_operator(const GridShape& s)
{
    std::vector<Triplet> t;
    int row = 0;
    for (int z = 1; z + 1 < s.nz; ++z)
        for (int x = 0; x < s.nx; ++x)
            for (int y = 0; y < s.ny; ++y) {
                t.emplace_back(row, index(s, x, y, z - 1), 1.0);
                t.emplace_back(row, index(s, x, y, z), -2.0);
                t.emplace_back(row++, index(s, x, y, z + 1), 1.0);
            }
    return build(row, s, t);
}

SparseMatrix first_difference_operator(const GridShape& s)
{
    std::vector<Triplet> t;
    int row = 0;
    for (int z = 0; z < s.nz; ++z)
        for (int x = 0; x < s.nx; ++x)
            for (int y = 0; y < s.ny; ++y) {
                const int next[3][3] = {{x + 1, y, z}, {x, y + 1, z}, {x, y, z + 1}};
                for (const auto& n : next) {
                    if (n[0] >= s.nx || n[1] >= s.ny || n[2] >= s.nz) continue;
                    t.emplace_back(row, index(s, x, y, z), 1.0);
                    t.emplace_back(row++, index(s, n[0], n[1], n[2]), -1.0);
                }
            }
    return build(row, s, t);
}

SparseMatrix laplacian_operator(const GridShape& s)
{
    std::vector<Triplet> t;
    const double cx = 1.0 / (s.dx * s.dx), cy = 1.0 / (s.dy * s.dy), cz = 1.0 / (s.dz * s.dz);
    int row = 0;
    for (int z = 1; z + 1 < s.nz; ++z)
        for (int x = 1; x + 1 < s.nx; ++x)
            for (int y = 1; y + 1 < s.ny; ++y) {
                t.emplace_back(row, index(s, x, y, z), -2.0 * (cx + cy + cz));
                t.emplace_back(row, index(s, x - 1, y, z), cx);
                t.emplace_back(row, index(s, x + 1, y, z), cx);
                t.emplace_back(row, index(s, x, y - 1, z), cy);
                t.emplace_back(row, index(s, x, y + 1, z), cy);
                t.emplace_back(row, index(s, x, y, z - 1), cz);
                t.emplace_back(row++, index(s, x, y, z + 1), cz);
            }
    return build(row, s, t);
}

double SplitPenalty::evaluate(const Eigen::VectorXd& v) const
{
    double p = 0.0;
    if (smooth.rows() > 0) p += (smooth * v).squaredNorm();
    if (weight > 0.0 && coupling.rows() > 0) {
        const Eigen::VectorXd g = coupling * v;
        double groups = 0.0;
        for (std::size_t k = 0; k + 1 < group_start.size(); ++k)
            groups += g.segment(group_start[k], group_start[k + 1] - group_start[k]).norm();
        p += weight * groups;
    }
    return p;
}

SplitPenalty split_penalty(const GridShape& shape, const RegularizerSpec& spec)
{
    spec.validate();
    SplitPenalty out;
    const auto n = static_cast<Eigen::Index>(parameter_count(shape));
    out.smooth.resize(0, n);
    out.coupling.resize(0, n);

    auto scalar_groups = [&](int rows) {
        out.group_start.resize(rows + 1);
        for (int r = 0; r <= rows; ++r) out.group_start[r] = r;
    };

    switch (spec.kind) {
    case PenaltyKind::DLS: break;
    case PenaltyKind::Proposed: {
        // (1/2) lambda_hor Omega_hor = lambda_hor ||D_hor v||^2 over unordered pairs.
        out.smooth = std::sqrt(spec.lambda_hor) * horizontal_difference_operator(shape);
        out.coupling = vertical_second_difference_operator(shape);
        const int layer = shape.nx * shape.ny;
        out.group_start.clear();
        for (int z = 0; z <= shape.nz - 2; ++z) out.group_start.push_back(z * layer);
        out.weight = spec.lambda_ver;
        break;
    }
    case PenaltyKind::L2Smooth: {
        const SparseMatrix a = std::sqrt(spec.lambda_ver) * vertical_second_difference_operator(shape);
        const SparseMatrix d = std::sqrt(spec.lambda_hor) * horizontal_difference_operator(shape);
        SparseMatrix m(a.rows() + d.rows(), n);
        m.topRows(a.rows()) = a;
        m.bottomRows(d.rows()) = d;
        out.smooth = m;
        break;
    }
    case PenaltyKind::Lap: out.smooth = std::sqrt(spec.lambda_lap) * laplacian_operator(shape); break;
    case PenaltyKind::L1First:
        // Ordered pairs count each unordered difference twice.
        out.coupling = first_difference_operator(shape);
        scalar_groups(static_cast<int>(out.coupling.rows()));
        out.weight = 2.0 * spec.lambda_l1first;
        break;
    case PenaltyKind::L1Second:
        out.coupling = laplacian_operator(shape);
        scalar_groups(static_cast<int>(out.coupling.rows()));
        out.weight = spec.lambda_l1second;
        break;
    }
    return out;
}

Eigen::VectorXd penalty_gradient(const VelocityGrid& grid, const RegularizerSpec& spec)
{
    if (spec.kind != PenaltyKind::DLS && spec.kind != PenaltyKind::L2Smooth && spec.kind != PenaltyKind::Lap)
        throw UsageError("penalty " + to_string(spec.kind) + " is not differentiable");
    const SplitPenalty p = split_penalty(grid.shape(), spec);
    const Eigen::VectorXd v = grid.interior();
    if (p.smooth.rows() == 0) return Eigen::VectorXd::Zero(v.size());
    return 2.0 * (p.smooth.transpose() * (p.smooth * v));
}

Eigen::VectorXd horizontal_penalty_gradient(const VelocityGrid& grid)
{
    const SparseMatrix d = horizontal_difference_operator(grid.shape());
    return 2.0 * (d.transpose() * (d * grid.interior()));
}

} // namespace letomo
