#include "aet/fem.hpp"

#include "aet/error.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace aet {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

}  // namespace

// ---------------------------------------------------------------------------
// NodalField

NodalField::NodalField(std::shared_ptr<const Mesh> m, Vector v)
    : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh) throw InvalidArgument("nodal field without a mesh");
    if (static_cast<std::size_t>(values.size()) != mesh->vertex_count()) {
        throw InvalidArgument("nodal field has " + std::to_string(values.size()) +
                              " coefficients for a mesh with " +
                              std::to_string(mesh->vertex_count()) + " vertices");
    }
    if (!values.allFinite()) throw InvalidArgument("nodal field contains non-finite values");
}

NodalField NodalField::constant(std::shared_ptr<const Mesh> mesh, double value) {
    const auto n = static_cast<Eigen::Index>(mesh->vertex_count());
    return NodalField(std::move(mesh), Vector::Constant(n, value));
}

NodalField NodalField::sample(std::shared_ptr<const Mesh> mesh,
                              const std::function<double(Point)>& f) {
    Vector v(static_cast<Eigen::Index>(mesh->vertex_count()));
    const auto& pts = mesh->vertices();
    for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = f(pts[i]);
    return NodalField(std::move(mesh), std::move(v));
}

void InnerProductSpec::validate() const {
    if (mode != InnerProductMode::H2Beta) return;
    for (double b : beta) {
        if (!(b > 0.0)) throw InvalidArgument("inner-product weights must be positive");
    }
}

// ---------------------------------------------------------------------------
// FemSpace

FemSpace::FemSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidArgument("FemSpace needs a mesh");
    const auto& pts = mesh_->vertices();
    const auto& tris = mesh_->triangles();
    const auto nt = tris.size();
    const auto nv = static_cast<Eigen::Index>(pts.size());

    areas_.resize(static_cast<Eigen::Index>(nt));
    gradients_.resize(nt);
    Triplets mass_entries, stiff_entries;
    mass_entries.reserve(9 * nt);
    stiff_entries.reserve(9 * nt);

    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = tris[t];
        const Point p0 = pts[tri[0]], p1 = pts[tri[1]], p2 = pts[tri[2]];
        const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
        const double area = 0.5 * twice_area;
        areas_(static_cast<Eigen::Index>(t)) = area;
        gradients_[t] = {Eigen::Vector2d(p1.y - p2.y, p2.x - p1.x) / twice_area,
                         Eigen::Vector2d(p2.y - p0.y, p0.x - p2.x) / twice_area,
                         Eigen::Vector2d(p0.y - p1.y, p1.x - p0.x) / twice_area};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                mass_entries.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
                stiff_entries.emplace_back(tri[a], tri[b],
                                           area * gradients_[t][a].dot(gradients_[t][b]));
            }
        }
    }
    mass_.resize(nv, nv);
    mass_.setFromTriplets(mass_entries.begin(), mass_entries.end());
    laplacian_.resize(nv, nv);
    laplacian_.setFromTriplets(stiff_entries.begin(), stiff_entries.end());
    lumped_ = mass_ * Vector::Ones(nv);
}

Vector FemSpace::triangle_average(const Vector& nodal) const {
    const auto& tris = mesh_->triangles();
    Vector out(static_cast<Eigen::Index>(tris.size()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
        out(static_cast<Eigen::Index>(t)) =
            (nodal(tris[t][0]) + nodal(tris[t][1]) + nodal(tris[t][2])) / 3.0;
    }
    return out;
}

Vector FemSpace::average_transpose(const Vector& per_triangle) const {
    const auto& tris = mesh_->triangles();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(vertex_count()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const double share = per_triangle(static_cast<Eigen::Index>(t)) / 3.0;
        for (int v : tris[t]) out(v) += share;
    }
    return out;
}

GradientField FemSpace::gradient(const Vector& nodal) const {
    const auto& tris = mesh_->triangles();
    GradientField out(static_cast<Eigen::Index>(tris.size()), 2);
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& g = gradients_[t];
        const Eigen::Vector2d grad =
            nodal(tris[t][0]) * g[0] + nodal(tris[t][1]) * g[1] + nodal(tris[t][2]) * g[2];
        out.row(static_cast<Eigen::Index>(t)) = grad.transpose();
    }
    return out;
}

Vector FemSpace::weighted_load(const Vector& weight, const Vector& nodal) const {
    const auto& tris = mesh_->triangles();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(vertex_count()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& tri = tris[t];
        const double sum = nodal(tri[0]) + nodal(tri[1]) + nodal(tri[2]);
        const double c = weight(static_cast<Eigen::Index>(t)) * areas_(static_cast<Eigen::Index>(t)) / 12.0;
        for (int v : tri) out(v) += c * (nodal(v) + sum);
    }
    return out;
}

Vector FemSpace::product_integrals(const Vector& a, const Vector& b) const {
    const auto& tris = mesh_->triangles();
    Vector out(static_cast<Eigen::Index>(tris.size()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& tri = tris[t];
        double diag = 0.0, sa = 0.0, sb = 0.0;
        for (int v : tri) {
            diag += a(v) * b(v);
            sa += a(v);
            sb += b(v);
        }
        out(static_cast<Eigen::Index>(t)) = areas_(static_cast<Eigen::Index>(t)) / 12.0 * (diag + sa * sb);
    }
    return out;
}

SparseMatrix FemSpace::weighted_stiffness(const Vector& coefficient) const {
    const auto& tris = mesh_->triangles();
    Triplets entries;
    entries.reserve(9 * tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const double c = coefficient(static_cast<Eigen::Index>(t)) * areas_(static_cast<Eigen::Index>(t));
        if (c == 0.0) continue;
        const auto& g = gradients_[t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                entries.emplace_back(tris[t][a], tris[t][b], c * g[a].dot(g[b]));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(vertex_count());
    SparseMatrix k(n, n);
    k.setFromTriplets(entries.begin(), entries.end());
    return k;
}

Vector FemSpace::gradient_load(const Vector& weight, const GradientField& field) const {
    const auto& tris = mesh_->triangles();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(vertex_count()));
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const double w = weight(static_cast<Eigen::Index>(t));
        if (w == 0.0) continue;
        const Eigen::Vector2d f = field.row(static_cast<Eigen::Index>(t)).transpose();
        for (int a = 0; a < 3; ++a) out(tris[t][a]) += w * gradients_[t][a].dot(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Assembly

SparseMatrix assemble_stiffness(const FemSpace& space, const NodalField& sigma,
                                double sigma_floor) {
    if (sigma.size() != space.vertex_count()) {
        throw InvalidArgument("conductivity does not match the mesh");
    }
    const double lowest = sigma.values.minCoeff();
    if (lowest < sigma_floor) {
        std::ostringstream msg;
        msg << "conductivity " << lowest << " is below the admissibility floor " << sigma_floor;
        throw AdmissibilityError(msg.str());
    }
    return space.weighted_stiffness(space.triangle_average(sigma.values));
}

SparseMatrix assemble_mass(const Mesh& mesh) {
    const auto& pts = mesh.vertices();
    const auto n = static_cast<Eigen::Index>(pts.size());
    Triplets entries;
    entries.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.signed_area(t);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                entries.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
            }
        }
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

Vector assemble_boundary_load(const Mesh& mesh, const std::function<double(double)>& g,
                              const BoundaryArc& arc) {
    static const double gauss = 0.5 / std::sqrt(3.0);
    const auto& pts = mesh.vertices();
    Vector b = Vector::Zero(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t e : accessible_boundary_edges(mesh, arc)) {
        const auto [i, j] = mesh.boundary_edges()[e].vertices;
        const Point p = pts[i], q = pts[j];
        const double half_length = 0.5 * std::hypot(q.x - p.x, q.y - p.y);
        for (double t : {0.5 - gauss, 0.5 + gauss}) {
            const double x = (1.0 - t) * p.x + t * q.x;
            const double y = (1.0 - t) * p.y + t * q.y;
            const double value = g(wrap_angle(std::atan2(y, x))) * half_length;
            b(i) += value * (1.0 - t);
            b(j) += value * t;
        }
    }
    const double imbalance = b.sum();
    if (std::abs(imbalance) > 1e-8 * b.norm()) {
        std::ostringstream msg;
        msg << "boundary load violates compatibility (sum " << imbalance
            << "); the Neumann solve projects it out";
        warn(msg.str());
    }
    return b;
}

// ---------------------------------------------------------------------------
// Neumann solve

NeumannSolver::NeumannSolver(const SparseMatrix& stiffness, const Vector& mean_weights)
    : weights_(mean_weights) {
    const auto n = stiffness.rows();
    if (stiffness.cols() != n || mean_weights.size() != n) {
        throw InvalidArgument("Neumann system dimensions disagree");
    }
    Triplets entries;
    entries.reserve(static_cast<std::size_t>(stiffness.nonZeros() + 2 * n));
    for (Eigen::Index c = 0; c < stiffness.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(stiffness, c); it; ++it) {
            entries.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        entries.emplace_back(i, n, mean_weights(i));
        entries.emplace_back(n, i, mean_weights(i));
    }
    bordered_.resize(n + 1, n + 1);
    bordered_.setFromTriplets(entries.begin(), entries.end());
    bordered_.makeCompressed();
    lu_.compute(bordered_);
    if (lu_.info() != Eigen::Success) {
        throw SolverError("factorization of the Neumann system failed: " + lu_.lastErrorMessage(),
                          std::numeric_limits<double>::infinity());
    }
}

Vector NeumannSolver::solve(const Vector& rhs, bool quiet) const {
    const auto n = weights_.size();
    if (rhs.size() != n) throw InvalidArgument("right-hand side does not match the system");
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return Vector::Zero(n);

    if (!quiet && std::abs(rhs.sum()) > 1e-8 * rhs_norm) {
        std::ostringstream msg;
        msg << "incompatible Neumann data (sum " << rhs.sum() << ") projected onto the range";
        warn(msg.str());
    }

    Vector extended = Vector::Zero(n + 1);
    extended.head(n) = rhs;
    Vector x = lu_.solve(extended);
    Vector residual = extended - bordered_ * x;
    if (residual.norm() > 1e-13 * rhs_norm) {
        x += lu_.solve(residual);
        residual = extended - bordered_ * x;
    }
    const double achieved = residual.norm() / rhs_norm;
    if (!(achieved <= 1e-10)) {
        std::ostringstream msg;
        msg << "Neumann solve missed its tolerance: relative residual " << achieved;
        throw SolverError(msg.str(), achieved);
    }
    return x.head(n);
}

NodalField solve_neumann_zero_mean(const SparseMatrix& stiffness, const Vector& rhs,
                                   std::shared_ptr<const Mesh> mesh) {
    const Vector weights = assemble_mass(*mesh) * Vector::Ones(stiffness.rows());
    NeumannSolver solver(stiffness, weights);
    return NodalField(std::move(mesh), solver.solve(rhs));
}

// ---------------------------------------------------------------------------
// Inner products

SparseMatrix gram_matrix(const FemSpace& space, const InnerProductSpec& spec) {
    spec.validate();
    if (spec.mode == InnerProductMode::L2) return space.mass();

    const std::array<double, 3> beta =
        spec.mode == InnerProductMode::H2 ? std::array<double, 3>{1.0, 1.0, 1.0} : spec.beta;
    const Vector inv_lumped = space.lumped_mass().cwiseInverse();
    const SparseMatrix laplace_surrogate = inv_lumped.asDiagonal() * space.laplacian();
    const SparseMatrix second = laplace_surrogate.transpose() * (space.mass() * laplace_surrogate);
    SparseMatrix g = beta[0] * space.mass() + beta[1] * space.laplacian() + beta[2] * second;
    SparseMatrix symmetric = 0.5 * (g + SparseMatrix(g.transpose()));
    symmetric.makeCompressed();
    return symmetric;
}

EmbeddingAdjoint::EmbeddingAdjoint(std::shared_ptr<const FemSpace> space,
                                   const InnerProductSpec& spec)
    : space_(std::move(space)), spec_(spec), gram_(gram_matrix(*space_, spec)) {
    gram_norm_ = gram_.norm();
    ldlt_.compute(gram_);
    if (ldlt_.info() != Eigen::Success) {
        throw SolverError("Gram matrix factorization failed (not positive definite)",
                          std::numeric_limits<double>::infinity());
    }
}

Vector EmbeddingAdjoint::solve_dual(const Vector& functional) const {
    Vector x = ldlt_.solve(functional);
    const double scale = functional.norm();
    if (scale == 0.0) return Vector::Zero(functional.size());
    Vector residual = functional - gram_ * x;
    if (residual.norm() > 1e-13 * scale) {
        x += ldlt_.solve(residual);
        residual = functional - gram_ * x;
    }
    // Normwise backward error: the H2 Gram matrix is too ill-conditioned for a plain
    // relative residual to reach round-off.
    const double achieved = residual.norm() / (gram_norm_ * x.norm() + scale);
    if (!(achieved <= 1e-10)) {
        std::ostringstream msg;
        msg << "Riesz solve missed its tolerance: backward error " << achieved;
        throw SolverError(msg.str(), achieved);
    }
    return x;
}

NodalField EmbeddingAdjoint::apply(const NodalField& w) const {
    if (spec_.mode == InnerProductMode::L2) return w;
    return NodalField(w.mesh, solve_dual(space_->mass() * w.values));
}

NodalField embedding_adjoint(const NodalField& w, const InnerProductSpec& spec) {
    spec.validate();
    if (spec.mode == InnerProductMode::L2) return w;
    EmbeddingAdjoint riesz(std::make_shared<FemSpace>(w.mesh), spec);
    return riesz.apply(w);
}

void write_matrix_coo(std::ostream& out, const SparseMatrix& matrix) {
    const auto old_precision = out.precision(17);
    for (Eigen::Index c = 0; c < matrix.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(matrix, c); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace aet
