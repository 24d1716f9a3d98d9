#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace letomo {

/// Local Cartesian position in km; x east, y north, z positive downward.
using Point = Eigen::Vector3d;

/// Dimensions and geometry of the interior lattice plus its fixed boundary.
struct GridShape {
    int nx = 2;
    int ny = 2;
    int nz = 2;
    double dx = 1.0;
    double dy = 1.0;
    double dz = 1.0;
    Point origin = Point::Zero();
    /// Horizontal distance from the edge interior points to the fixed ring.
    double outer_offset = 220.0;
    /// Absolute depth of the fixed floor layer.
    double outer_depth = 200.0;

    void validate() const;
};

/// One corner of an interpolation cell: padded node id and trilinear weight.
struct Corner {
    int node;
    double weight;
};

struct ProfilePoint {
    double depth;
    double value;
};

/// Velocity lattice with a fixed outer ring per layer and a fixed floor.
///
/// Storage is the padded lattice of (nx+2) x (ny+2) x (nz+1) nodes. Padded
/// index I = 0 and I = nx+1 are the west/east ring, likewise J for
/// south/north; K = nz is the floor. Interior node (x, y, z) sits at padded
/// (x+1, y+1, z). Only interior values are model parameters; the parameter
/// vector stacks layers, each layer flattened x-major then y:
/// index = (z * nx + x) * ny + y.
class VelocityGrid {
public:
    VelocityGrid(const GridShape& shape, double velocity);

    const GridShape& shape() const { return shape_; }
    int nx() const { return shape_.nx; }
    int ny() const { return shape_.ny; }
    int nz() const { return shape_.nz; }

    std::size_t layer_size() const { return static_cast<std::size_t>(shape_.nx) * shape_.ny; }
    std::size_t parameter_count() const { return layer_size() * shape_.nz; }
    std::size_t parameter_index(int x, int y, int z) const
    {
        return (static_cast<std::size_t>(z) * shape_.nx + x) * shape_.ny + y;
    }

    double at(int x, int y, int z) const { return values_[node_id(x + 1, y + 1, z)]; }
    void set(int x, int y, int z, double v);

    /// Interior values in parameter order.
    Eigen::VectorXd interior() const;
    void set_interior(const Eigen::VectorXd& v);

    /// Fixed boundary: one ring value per interior layer plus the floor.
    std::vector<double> outer_ring() const;
    double outer_floor() const { return values_[node_id(0, 0, shape_.nz)]; }
    void set_outer(const std::vector<double>& ring, double floor);

    int padded_nx() const { return shape_.nx + 2; }
    int padded_ny() const { return shape_.ny + 2; }
    int padded_nz() const { return shape_.nz + 1; }
    std::size_t node_count() const { return values_.size(); }
    int node_id(int i, int j, int k) const { return (k * padded_ny() + j) * padded_nx() + i; }
    std::array<int, 3> node_indices(int node) const;
    Point node_position(int node) const;
    double node_value(int node) const { return values_[node]; }
    /// Parameter index of a padded node, or -1 for a fixed outer node.
    long node_parameter(int node) const;
    const std::vector<double>& node_values() const { return values_; }

    const std::vector<double>& axis_x() const { return xs_; }
    const std::vector<double>& axis_y() const { return ys_; }
    const std::vector<double>& axis_z() const { return zs_; }

    /// Depth of interior layer z ("Layer d" sits at d km when origin.z = 0).
    double layer_depth(int z) const { return shape_.origin.z() + z * shape_.dz; }

    bool contains(const Point& p) const;

    /// Enclosing padded cell (lower corner indices) of p.
    std::array<int, 3> cell_of(const Point& p) const;

    /// The eight corners of p's enclosing cell with trilinear weights.
    /// Throws DomainError naming the offending coordinate when p is outside.
    std::array<Corner, 8> corners(const Point& p) const;

    double interpolate(const Point& p) const;

private:
    GridShape shape_;
    std::vector<double> xs_, ys_, zs_;
    std::vector<double> values_;
};

/// Trilinear velocity at p over the padded lattice.
double interpolate_velocity(const VelocityGrid& grid, const Point& p);

/// Sum over the layer of squared vertical second differences centred on z.
/// Valid for 1 <= z <= nz-2.
double second_difference_gz(const VelocityGrid& grid, int z);

/// u_{z-1} - 2 u_z + u_{z+1} in layer order; its squared norm is g_z.
Eigen::VectorXd apply_az(const VelocityGrid& grid, int z);

/// Mean over interior points of each layer; outer points are excluded.
std::vector<ProfilePoint> layer_mean_profile(const VelocityGrid& grid);

} // namespace letomo
