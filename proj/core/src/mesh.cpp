#include "aet/mesh.hpp"

#include "aet/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace aet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCircleTolerance = 1e-12;
constexpr double kMinAngleFloorDegrees = 15.0;

double dist2(Point a, Point b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryArc

BoundaryArc::BoundaryArc(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || alpha > kTwoPi + 1e-12) {
        throw InvalidArgument("boundary arc angle must lie in (0, 2*pi], got " +
                              std::to_string(alpha));
    }
    alpha_ = std::min(alpha, kTwoPi);
}

bool BoundaryArc::is_full() const noexcept { return alpha_ >= kTwoPi - 1e-12; }

bool BoundaryArc::contains(double theta) const noexcept {
    if (is_full()) return true;
    return wrap_angle(theta) <= alpha_;
}

double wrap_angle(double theta) noexcept {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
    const int n = static_cast<int>(vertices_.size());
    if (n < 3 || triangles_.empty()) throw InvalidArgument("mesh needs at least one triangle");

    std::map<std::pair<int, int>, int> edge_use;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int v : tri) {
            if (v < 0 || v >= n) throw InvalidArgument("triangle references a missing vertex");
        }
        if (!(signed_area(t) > 0.0)) {
            throw InvalidArgument("triangle " + std::to_string(t) +
                                  " is degenerate or clockwise");
        }
        for (int a = 0; a < 3; ++a) {
            int i = tri[a];
            int j = tri[(a + 1) % 3];
            edge_use[{std::min(i, j), std::max(i, j)}] += 1;
        }
    }

    std::map<std::pair<int, int>, int> boundary_set;
    for (const auto& e : boundary_edges_) {
        const auto [i, j] = e.vertices;
        if (i < 0 || i >= n || j < 0 || j >= n) {
            throw InvalidArgument("boundary edge references a missing vertex");
        }
        for (int v : {i, j}) {
            const double r = std::hypot(vertices_[v].x, vertices_[v].y);
            if (std::abs(r - 1.0) > kCircleTolerance) {
                throw InvalidArgument("boundary vertex " + std::to_string(v) +
                                      " is not on the unit circle");
            }
        }
        boundary_set[{std::min(i, j), std::max(i, j)}] += 1;
    }

    for (const auto& [edge, count] : edge_use) {
        const bool on_boundary = boundary_set.count(edge) != 0;
        if (count == 2 && !on_boundary) continue;
        if (count == 1 && on_boundary) continue;
        throw InvalidArgument("triangulation is not conforming at edge (" +
                              std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                              ")");
    }
    if (boundary_set.size() != boundary_edges_.size()) {
        throw InvalidArgument("duplicate boundary edges");
    }
    for (const auto& [edge, count] : boundary_set) {
        if (edge_use.count(edge) == 0) throw InvalidArgument("boundary edge is not a mesh edge");
    }
    edge_count_ = edge_use.size();

    build_locator();
}

double Mesh::signed_area(std::size_t t) const {
    const auto& tri = triangles_.at(t);
    return 0.5 * cross(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) sum += signed_area(t);
    return sum;
}

double Mesh::min_angle_degrees() const {
    double smallest = 180.0;
    for (const auto& tri : triangles_) {
        for (int a = 0; a < 3; ++a) {
            const Point p = vertices_[tri[a]];
            const Point q = vertices_[tri[(a + 1) % 3]];
            const Point r = vertices_[tri[(a + 2) % 3]];
            const double ux = q.x - p.x, uy = q.y - p.y;
            const double vx = r.x - p.x, vy = r.y - p.y;
            const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
            smallest = std::min(smallest, angle * 180.0 / std::numbers::pi);
        }
    }
    return smallest;
}

long Mesh::euler_characteristic() const {
    return static_cast<long>(vertices_.size()) - static_cast<long>(edge_count_) +
           static_cast<long>(triangles_.size());
}

void Mesh::build_locator() {
    grid_n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size()) / 2.0)));
    buckets_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, {});
    auto cell = [this](double c) {
        int k = static_cast<int>(std::floor((c + 1.0) * 0.5 * grid_n_));
        return std::clamp(k, 0, grid_n_ - 1);
    };
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        double xmin = 2, xmax = -2, ymin = 2, ymax = -2;
        for (int v : triangles_[t]) {
            xmin = std::min(xmin, vertices_[v].x);
            xmax = std::max(xmax, vertices_[v].x);
            ymin = std::min(ymin, vertices_[v].y);
            ymax = std::max(ymax, vertices_[v].y);
        }
        for (int i = cell(xmin); i <= cell(xmax); ++i) {
            for (int j = cell(ymin); j <= cell(ymax); ++j) {
                buckets_[static_cast<std::size_t>(j) * grid_n_ + i].push_back(static_cast<int>(t));
            }
        }
    }
}

std::array<double, 3> Mesh::barycentric(std::size_t t, Point p) const {
    const auto& tri = triangles_.at(t);
    const Point a = vertices_[tri[0]], b = vertices_[tri[1]], c = vertices_[tri[2]];
    const double det = cross(a, b, c);
    const double l1 = cross(p, b, c) / det;
    const double l2 = cross(a, p, c) / det;
    return {l1, l2, 1.0 - l1 - l2};
}

std::size_t Mesh::locate(Point p) const {
    auto cell = [this](double c) {
        int k = static_cast<int>(std::floor((c + 1.0) * 0.5 * grid_n_));
        return std::clamp(k, 0, grid_n_ - 1);
    };
    const int ci = cell(p.x);
    const int cj = cell(p.y);

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    auto consider = [&](int t) {
        const auto l = barycentric(static_cast<std::size_t>(t), p);
        const double score = std::min({l[0], l[1], l[2]});
        if (score > best_score) {
            best_score = score;
            best = static_cast<std::size_t>(t);
        }
    };

    for (int radius = 0; radius <= grid_n_; ++radius) {
        for (int i = ci - radius; i <= ci + radius; ++i) {
            for (int j = cj - radius; j <= cj + radius; ++j) {
                if (i < 0 || j < 0 || i >= grid_n_ || j >= grid_n_) continue;
                if (std::max(std::abs(i - ci), std::abs(j - cj)) != radius) continue;
                for (int t : buckets_[static_cast<std::size_t>(j) * grid_n_ + i]) consider(t);
            }
        }
        if (best_score >= -1e-12) return best;
        // Points just outside the polygon are resolved by the first ring of neighbours.
        if (radius >= 1 && best_score > -std::numeric_limits<double>::infinity()) return best;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Generation

Mesh generate_polar_disk_mesh(int rings, int boundary_count) {
    if (rings < 1) throw InvalidArgument("polar mesh needs at least one ring");
    if (boundary_count < 3) throw InvalidArgument("polar mesh needs at least 3 boundary vertices");

    std::vector<Point> vertices{{0.0, 0.0}};
    std::vector<int> ring_start{0};
    std::vector<int> ring_size{1};
    for (int k = 1; k <= rings; ++k) {
        const int count = k == rings
                              ? boundary_count
                              : std::max(3, static_cast<int>(std::lround(
                                                static_cast<double>(boundary_count) * k / rings)));
        const double radius = static_cast<double>(k) / rings;
        // Alternate rings are shifted by half a step; the outer ring starts at theta = 0.
        const double offset = ((rings - k) % 2) * 0.5;
        ring_start.push_back(static_cast<int>(vertices.size()));
        ring_size.push_back(count);
        for (int i = 0; i < count; ++i) {
            const double theta = kTwoPi * (i + offset) / count;
            if (k == rings) {
                vertices.push_back({std::cos(theta), std::sin(theta)});
            } else {
                vertices.push_back({radius * std::cos(theta), radius * std::sin(theta)});
            }
        }
    }

    std::vector<Triangle> triangles;
    // Fan around the centre.
    for (int i = 0; i < ring_size[1]; ++i) {
        const int a = ring_start[1] + i;
        const int b = ring_start[1] + (i + 1) % ring_size[1];
        triangles.push_back({0, a, b});
    }
    // Strips between consecutive rings, closing the shorter diagonal at each step.
    for (int k = 2; k <= rings; ++k) {
        const int ni = ring_size[k - 1], no = ring_size[k];
        const int si = ring_start[k - 1], so = ring_start[k];
        auto inner = [&](int i) { return si + (i % ni); };
        auto outer = [&](int o) { return so + (o % no); };
        int i = 0, o = 0;
        while (i < ni || o < no) {
            bool advance_outer;
            if (i == ni) {
                advance_outer = true;
            } else if (o == no) {
                advance_outer = false;
            } else {
                const double d_outer = dist2(vertices[inner(i)], vertices[outer(o + 1)]);
                const double d_inner = dist2(vertices[inner(i + 1)], vertices[outer(o)]);
                advance_outer = d_outer <= d_inner;
            }
            if (advance_outer) {
                triangles.push_back({inner(i), outer(o), outer(o + 1)});
                ++o;
            } else {
                triangles.push_back({inner(i), outer(o), inner(i + 1)});
                ++i;
            }
        }
    }

    std::vector<BoundaryEdge> boundary;
    boundary.reserve(static_cast<std::size_t>(boundary_count));
    for (int i = 0; i < boundary_count; ++i) {
        BoundaryEdge e;
        e.vertices = {ring_start[rings] + i, ring_start[rings] + (i + 1) % boundary_count};
        e.theta_mid = kTwoPi * (i + 0.5) / boundary_count;
        boundary.push_back(e);
    }

    Mesh mesh(std::move(vertices), std::move(triangles), std::move(boundary));
    if (mesh.euler_characteristic() != 1) {
        throw Error("generated mesh has Euler characteristic " +
                    std::to_string(mesh.euler_characteristic()));
    }
    if (mesh.min_angle_degrees() <= kMinAngleFloorDegrees) {
        std::ostringstream msg;
        msg << "generated mesh violates the " << kMinAngleFloorDegrees
            << " degree minimum-angle floor (min angle " << mesh.min_angle_degrees() << ")";
        throw Error(msg.str());
    }
    return mesh;
}

namespace {

long polar_vertex_count(int rings, int boundary_count) {
    long total = 1;
    for (int k = 1; k <= rings; ++k) {
        total += k == rings ? boundary_count
                            : std::max(3L, std::lround(static_cast<double>(boundary_count) * k / rings));
    }
    return total;
}

}  // namespace

Mesh generate_disk_mesh(int target_vertex_count) {
    if (target_vertex_count < 4) {
        throw InvalidArgument("target vertex count must be at least 4, got " +
                              std::to_string(target_vertex_count));
    }
    // Six vertices per unit of ring index gives nearly equilateral triangles.
    const int rings = std::max(
        1, static_cast<int>(std::lround(std::sqrt((target_vertex_count - 1) / 3.0))));
    // Boundary counts divisible by 4 keep the quarter-circle arcs on vertices.
    const int step = target_vertex_count >= 100 ? 4 : 1;

    int best_count = 3;
    long best_miss = std::numeric_limits<long>::max();
    for (int count = step * ((3 + step - 1) / step); count <= 12 * rings + 12; count += step) {
        const long miss = std::labs(polar_vertex_count(rings, count) - target_vertex_count);
        if (miss < best_miss) {
            best_miss = miss;
            best_count = count;
        }
    }
    return generate_polar_disk_mesh(rings, best_count);
}

std::vector<std::size_t> accessible_boundary_edges(const Mesh& mesh, const BoundaryArc& arc) {
    std::vector<std::size_t> result;
    const auto& edges = mesh.boundary_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (arc.contains(edges[e].theta_mid)) result.push_back(e);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Text format

void write_mesh(std::ostream& out, const Mesh& mesh) {
    const auto old_precision = out.precision(17);
    out << "vertices " << mesh.vertex_count() << " triangles " << mesh.triangle_count()
        << " boundary_edges " << mesh.boundary_edges().size() << '\n';
    for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges()) {
        out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << e.theta_mid << '\n';
    }
    out.precision(old_precision);
}

Mesh read_mesh(std::istream& in) {
    std::string kw_v, kw_t, kw_b;
    std::size_t nv = 0, nt = 0, nb = 0;
    if (!(in >> kw_v >> nv >> kw_t >> nt >> kw_b >> nb) || kw_v != "vertices" ||
        kw_t != "triangles" || kw_b != "boundary_edges") {
        throw IoError("malformed mesh header");
    }
    std::vector<Point> vertices(nv);
    for (auto& p : vertices) {
        if (!(in >> p.x >> p.y)) throw IoError("truncated mesh vertex block");
    }
    std::vector<Triangle> triangles(nt);
    for (auto& t : triangles) {
        if (!(in >> t[0] >> t[1] >> t[2])) throw IoError("truncated mesh triangle block");
    }
    std::vector<BoundaryEdge> boundary(nb);
    for (auto& e : boundary) {
        if (!(in >> e.vertices[0] >> e.vertices[1] >> e.theta_mid)) {
            throw IoError("truncated mesh boundary block");
        }
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

}  // namespace aet
