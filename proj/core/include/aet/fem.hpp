#pragma once

#include "aet/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace aet {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
/// One row per triangle, (d/dx, d/dy).
using GradientField = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Piecewise-linear scalar field: one coefficient per mesh vertex.
struct NodalField {
    NodalField() = default;
    NodalField(std::shared_ptr<const Mesh> mesh, Vector values);

    static NodalField constant(std::shared_ptr<const Mesh> mesh, double value);
    static NodalField sample(std::shared_ptr<const Mesh> mesh,
                             const std::function<double(Point)>& f);

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }

    std::shared_ptr<const Mesh> mesh;
    Vector values;
};

enum class InnerProductMode { L2, H2, H2Beta };

/// Domain-space inner product: sum over derivative orders 0..2 of beta_k <D^k u, D^k v>.
/// L2 uses only the zeroth-order term; H2 is H2Beta with unit weights.
struct InnerProductSpec {
    InnerProductMode mode = InnerProductMode::L2;
    std::array<double, 3> beta{1.0, 1.0, 1.0};

    static InnerProductSpec l2() { return {InnerProductMode::L2, {1.0, 0.0, 0.0}}; }
    static InnerProductSpec h2() { return {InnerProductMode::H2, {1.0, 1.0, 1.0}}; }
    static InnerProductSpec h2_beta(double b0 = 1.0, double b1 = 1e-3, double b2 = 1e-6) {
        return {InnerProductMode::H2Beta, {b0, b1, b2}};
    }

    /// Throws InvalidArgument unless the weights used by the mode are positive.
    void validate() const;
};

/// Per-mesh P1 geometry and the sigma-independent matrices. Immutable once built.
class FemSpace {
public:
    explicit FemSpace(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    std::size_t vertex_count() const noexcept { return mesh_->vertex_count(); }
    std::size_t triangle_count() const noexcept { return mesh_->triangle_count(); }

    double area(std::size_t t) const noexcept { return areas_[static_cast<Eigen::Index>(t)]; }
    const Vector& areas() const noexcept { return areas_; }
    /// Gradients of the three local hat functions of triangle t.
    const std::array<Eigen::Vector2d, 3>& basis_gradients(std::size_t t) const noexcept {
        return gradients_[t];
    }

    const SparseMatrix& mass() const noexcept { return mass_; }
    /// Row sums of the mass matrix; equals M * 1.
    const Vector& lumped_mass() const noexcept { return lumped_; }
    /// Stiffness matrix for sigma = 1.
    const SparseMatrix& laplacian() const noexcept { return laplacian_; }

    /// Per-triangle mean of the three vertex values.
    Vector triangle_average(const Vector& nodal) const;
    /// Per-triangle (constant) gradient of a P1 field.
    GradientField gradient(const Vector& nodal) const;

    /// b_i = int w g phi_i for a piecewise-constant w and a P1 field g (exact).
    /// Symmetric in the nodal argument: it is the w-weighted mass matrix applied to g.
    Vector weighted_load(const Vector& per_triangle_weight, const Vector& nodal) const;
    /// Per-triangle integrals int_T a b of two P1 fields (exact).
    Vector product_integrals(const Vector& a, const Vector& b) const;
    /// Transpose of triangle_average: scatters per-triangle values (1/3 each) to vertices.
    Vector average_transpose(const Vector& per_triangle) const;

    /// sum_T coeff_T * area_T * grad(phi_i) . grad(phi_j).
    SparseMatrix weighted_stiffness(const Vector& per_triangle_coefficient) const;

    /// Load vector b_i = sum_T weight_T * grad(phi_i)|_T . field_T, weight including any area.
    Vector gradient_load(const Vector& per_triangle_weight, const GradientField& field) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    Vector areas_;
    std::vector<std::array<Eigen::Vector2d, 3>> gradients_;
    SparseMatrix mass_;
    Vector lumped_;
    SparseMatrix laplacian_;
};

/// K_ij = sum_T sigma_T int_T grad(phi_i) . grad(phi_j), sigma_T the vertex average.
/// Throws AdmissibilityError if any vertex value is below sigma_floor.
SparseMatrix assemble_stiffness(const FemSpace& space, const NodalField& sigma,
                                double sigma_floor);

SparseMatrix assemble_mass(const Mesh& mesh);

/// b_i = int_{Gamma(alpha)} g phi_i ds, two-point Gauss rule per accessible boundary edge.
/// g receives the polar angle of the quadrature point. Warns when sum(b) is not ~0.
Vector assemble_boundary_load(const Mesh& mesh, const std::function<double(double)>& g,
                              const BoundaryArc& arc);

/// Factorization of the bordered Neumann system [K m; m^T 0] with m = M * 1.
/// One factorization serves any number of right-hand sides.
class NeumannSolver {
public:
    NeumannSolver(const SparseMatrix& stiffness, const Vector& mean_weights);

    /// Zero-mean solution u of K u = b. An incompatible b (sum != 0) is projected onto
    /// the range of K with a warning unless `quiet`. Throws SolverError when the bordered
    /// residual exceeds 1e-10 * |b|.
    Vector solve(const Vector& rhs, bool quiet = false) const;

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }

private:
    Vector weights_;
    SparseMatrix bordered_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

NodalField solve_neumann_zero_mean(const SparseMatrix& stiffness, const Vector& rhs,
                                   std::shared_ptr<const Mesh> mesh);

/// G = b0 M + b1 K1 + b2 L^T M L with L = diag(lumped)^-1 K1.
SparseMatrix gram_matrix(const FemSpace& space, const InnerProductSpec& spec);

/// Riesz map of the chosen domain inner product: x solves G x = r for an L2 functional r.
class EmbeddingAdjoint {
public:
    EmbeddingAdjoint(std::shared_ptr<const FemSpace> space, const InnerProductSpec& spec);

    const InnerProductSpec& spec() const noexcept { return spec_; }
    const SparseMatrix& gram() const noexcept { return gram_; }
    const FemSpace& space() const noexcept { return *space_; }

    /// Solves G x = functional.
    Vector solve_dual(const Vector& functional) const;
    /// Solves G x = M w; returns w itself in L2 mode.
    NodalField apply(const NodalField& w) const;

    double inner(const Vector& a, const Vector& b) const { return a.dot(gram_ * b); }
    double norm_squared(const Vector& a) const { return inner(a, a); }

private:
    std::shared_ptr<const FemSpace> space_;
    InnerProductSpec spec_;
    SparseMatrix gram_;
    double gram_norm_ = 0.0;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

NodalField embedding_adjoint(const NodalField& w, const InnerProductSpec& spec);

/// Coordinate-format dump "i j value", one nonzero per line.
void write_matrix_coo(std::ostream& out, const SparseMatrix& matrix);

}  // namespace aet
