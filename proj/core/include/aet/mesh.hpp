#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <vector>

namespace aet {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<int, 3>;

/// Edge on the unit circle, tagged with the polar angle of its midpoint in [0, 2*pi).
struct BoundaryEdge {
    std::array<int, 2> vertices{};
    double theta_mid = 0.0;
};

/// Accessible part of the boundary: the arc {theta in [0, alpha]} of the unit circle.
class BoundaryArc {
public:
    explicit BoundaryArc(double alpha);

    static BoundaryArc full() { return BoundaryArc(2.0 * std::numbers::pi); }

    double alpha() const noexcept { return alpha_; }
    bool is_full() const noexcept;

    /// True when theta (taken modulo 2*pi) lies in [0, alpha].
    bool contains(double theta) const noexcept;

    friend bool operator==(const BoundaryArc&, const BoundaryArc&) = default;

private:
    double alpha_;
};

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double theta) noexcept;

/// Conforming, counterclockwise-oriented triangulation of the unit disk.
/// Immutable after construction; the constructor validates orientation and conformity.
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t triangle_count() const noexcept { return triangles_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    /// Signed area of triangle t (positive for every triangle of a valid mesh).
    double signed_area(std::size_t t) const;
    double total_area() const;
    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_degrees() const;
    long euler_characteristic() const;

    /// Index of the triangle containing p, or the nearest one when p lies outside the
    /// polygonal domain (points on the unit circle between two boundary vertices).
    std::size_t locate(Point p) const;

    /// Barycentric coordinates of p with respect to triangle t.
    std::array<double, 3> barycentric(std::size_t t, Point p) const;

private:
    void build_locator();

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::size_t edge_count_ = 0;

    // Uniform bucket grid over [-1, 1]^2 for point location.
    int grid_n_ = 0;
    std::vector<std::vector<int>> buckets_;
};

/// Deterministic structured polar-ring mesh of the unit disk with about
/// target_vertex_count vertices. Boundary vertices are equally spaced, start at theta = 0
/// and lie exactly on the unit circle.
Mesh generate_disk_mesh(int target_vertex_count);

/// Polar-ring mesh with `rings` rings and `boundary_count` vertices on the outer circle.
/// Ring k carries round(boundary_count * k / rings) vertices.
Mesh generate_polar_disk_mesh(int rings, int boundary_count);

/// Indices of the boundary edges whose midpoint angle lies in [0, alpha].
std::vector<std::size_t> accessible_boundary_edges(const Mesh& mesh, const BoundaryArc& arc);

/// Plain-text mesh format:
///   vertices N triangles T boundary_edges B
///   N lines "x y", T lines "i j k", B lines "i j theta_mid".
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace aet
