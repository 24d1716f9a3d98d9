#include "letomo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "letomo/errors.hpp"

namespace letomo {

namespace {

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " must be positive and finite, got " << v;
        throw UsageError(os.str());
    }
}

// Lower cell index and fractional position of c along a monotone axis.
bool locate_axis(const std::vector<double>& axis, double c, int& cell, double& frac)
{
    const double tol = 1e-9 * (1.0 + std::abs(axis.back() - axis.front()));
    if (!(c >= axis.front() - tol && c <= axis.back() + tol)) return false;
    auto it = std::upper_bound(axis.begin(), axis.end(), c);
    int i = static_cast<int>(it - axis.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(axis.size()) - 2);
    cell = i;
    frac = std::clamp((c - axis[i]) / (axis[i + 1] - axis[i]), 0.0, 1.0);
    return true;
}

} // namespace

void GridShape::validate() const
{
    if (nx < 2 || ny < 2 || nz < 2) throw UsageError("grid needs at least 2 points per axis");
    require_positive(dx, "dx");
    require_positive(dy, "dy");
    require_positive(dz, "dz");
    require_positive(outer_offset, "outer_offset");
    const double bottom = origin.z() + (nz - 1) * dz;
    if (!(outer_depth > bottom)) {
        std::ostringstream os;
        os << "outer_depth " << outer_depth << " must lie below the deepest layer at " << bottom;
        throw UsageError(os.str());
    }
}

VelocityGrid::VelocityGrid(const GridShape& shape, double velocity) : shape_(shape)
{
    shape_.validate();
    require_positive(velocity, "velocity");

    xs_.push_back(shape_.origin.x() - shape_.outer_offset);
    for (int i = 0; i < shape_.nx; ++i) xs_.push_back(shape_.origin.x() + i * shape_.dx);
    xs_.push_back(xs_.back() + shape_.outer_offset);

    ys_.push_back(shape_.origin.y() - shape_.outer_offset);
    for (int j = 0; j < shape_.ny; ++j) ys_.push_back(shape_.origin.y() + j * shape_.dy);
    ys_.push_back(ys_.back() + shape_.outer_offset);

    for (int k = 0; k < shape_.nz; ++k) zs_.push_back(shape_.origin.z() + k * shape_.dz);
    zs_.push_back(shape_.outer_depth);

    values_.assign(static_cast<std::size_t>(padded_nx()) * padded_ny() * padded_nz(), velocity);
}

void VelocityGrid::set(int x, int y, int z, double v)
{
    require_positive(v, "velocity");
    values_[node_id(x + 1, y + 1, z)] = v;
}

Eigen::VectorXd VelocityGrid::interior() const
{
    Eigen::VectorXd v(parameter_count());
    for (int z = 0; z < nz(); ++z)
        for (int x = 0; x < nx(); ++x)
            for (int y = 0; y < ny(); ++y) v[parameter_index(x, y, z)] = at(x, y, z);
    return v;
}

void VelocityGrid::set_interior(const Eigen::VectorXd& v)
{
    if (static_cast<std::size_t>(v.size()) != parameter_count())
        throw UsageError("interior vector has the wrong length");
    for (Eigen::Index i = 0; i < v.size(); ++i) require_positive(v[i], "velocity");
    for (int z = 0; z < nz(); ++z)
        for (int x = 0; x < nx(); ++x)
            for (int y = 0; y < ny(); ++y) values_[node_id(x + 1, y + 1, z)] = v[parameter_index(x, y, z)];
}

std::vector<double> VelocityGrid::outer_ring() const
{
    std::vector<double> ring(nz());
    for (int z = 0; z < nz(); ++z) ring[z] = values_[node_id(0, 0, z)];
    return ring;
}

void VelocityGrid::set_outer(const std::vector<double>& ring, double floor)
{
    if (static_cast<int>(ring.size()) != nz()) throw UsageError("outer ring needs one value per layer");
    for (double r : ring) require_positive(r, "outer velocity");
    require_positive(floor, "outer floor velocity");
    for (int k = 0; k < padded_nz(); ++k)
        for (int j = 0; j < padded_ny(); ++j)
            for (int i = 0; i < padded_nx(); ++i) {
                if (k == nz())
                    values_[node_id(i, j, k)] = floor;
                else if (i == 0 || j == 0 || i == padded_nx() - 1 || j == padded_ny() - 1)
                    values_[node_id(i, j, k)] = ring[k];
            }
}

std::array<int, 3> VelocityGrid::node_indices(int node) const
{
    const int i = node % padded_nx();
    const int rest = node / padded_nx();
    return {i, rest % padded_ny(), rest / padded_ny()};
}

Point VelocityGrid::node_position(int node) const
{
    auto [i, j, k] = node_indices(node);
    return {xs_[i], ys_[j], zs_[k]};
}

long VelocityGrid::node_parameter(int node) const
{
    auto [i, j, k] = node_indices(node);
    if (i == 0 || j == 0 || i == padded_nx() - 1 || j == padded_ny() - 1 || k == nz()) return -1;
    return static_cast<long>(parameter_index(i - 1, j - 1, k));
}

bool VelocityGrid::contains(const Point& p) const
{
    int c;
    double f;
    return locate_axis(xs_, p.x(), c, f) && locate_axis(ys_, p.y(), c, f) && locate_axis(zs_, p.z(), c, f);
}

std::array<int, 3> VelocityGrid::cell_of(const Point& p) const
{
    std::array<int, 3> cell{};
    double f;
    const char* names = "xyz";
    const std::vector<double>* axes[3] = {&xs_, &ys_, &zs_};
    for (int a = 0; a < 3; ++a) {
        if (!locate_axis(*axes[a], p[a], cell[a], f)) {
            std::ostringstream os;
            os << "point (" << p.x() << ", " << p.y() << ", " << p.z() << ") is outside the padded domain: "
               << names[a] << " = " << p[a] << " not in [" << axes[a]->front() << ", " << axes[a]->back() << "]";
            throw DomainError(os.str());
        }
    }
    return cell;
}

std::array<Corner, 8> VelocityGrid::corners(const Point& p) const
{
    int ci, cj, ck;
    double fx, fy, fz;
    if (!locate_axis(xs_, p.x(), ci, fx) || !locate_axis(ys_, p.y(), cj, fy) || !locate_axis(zs_, p.z(), ck, fz))
        cell_of(p); // throws with the offending coordinate

    std::array<Corner, 8> out{};
    int n = 0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
                out[n++] = {node_id(ci + di, cj + dj, ck + dk), w};
            }
    return out;
}

double VelocityGrid::interpolate(const Point& p) const
{
    double v = 0.0;
    for (const Corner& c : corners(p)) v += c.weight * values_[c.node];
    return v;
}

double interpolate_velocity(const VelocityGrid& grid, const Point& p)
{
    return grid.interpolate(p);
}

Eigen::VectorXd apply_az(const VelocityGrid& grid, int z)
{
    if (z < 1 || z > grid.nz() - 2) {
        std::ostringstream os;
        os << "second difference undefined at layer " << z << " (valid 1.." << grid.nz() - 2 << ")";
        throw IndexError(os.str());
    }
    Eigen::VectorXd w(grid.layer_size());
    std::size_t n = 0;
    for (int x = 0; x < grid.nx(); ++x)
        for (int y = 0; y < grid.ny(); ++y)
            w[n++] = grid.at(x, y, z - 1) - 2.0 * grid.at(x, y, z) + grid.at(x, y, z + 1);
    return w;
}

double second_difference_gz(const VelocityGrid& grid, int z)
{
    if (z < 1 || z > grid.nz() - 2) {
        std::ostringstream os;
        os << "g_z undefined at layer " << z << " (valid 1.." << grid.nz() - 2 << ")";
        throw IndexError(os.str());
    }
    double g = 0.0;
    for (int x = 0; x < grid.nx(); ++x)
        for (int y = 0; y < grid.ny(); ++y) {
            const double upper = grid.at(x, y, z - 1) - grid.at(x, y, z);
            const double lower = grid.at(x, y, z) - grid.at(x, y, z + 1);
            g += (upper - lower) * (upper - lower);
        }
    return g;
}

std::vector<ProfilePoint> layer_mean_profile(const VelocityGrid& grid)
{
    std::vector<ProfilePoint> out;
    out.reserve(grid.nz());
    for (int z = 0; z < grid.nz(); ++z) {
        double sum = 0.0;
        for (int x = 0; x < grid.nx(); ++x)
            for (int y = 0; y < grid.ny(); ++y) sum += grid.at(x, y, z);
        out.push_back({grid.layer_depth(z), sum / static_cast<double>(grid.layer_size())});
    }
    return out;
}

} // namespace letomo
