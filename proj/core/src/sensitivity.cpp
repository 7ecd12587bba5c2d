#include "aet/sensitivity.hpp"

#include "aet/error.hpp"
#include "aet/parallel.hpp"

#include <cmath>
#include <string>

namespace aet {

namespace {

void check_direction(const ForwardState& state, const NodalField& field, const char* what) {
    if (field.size() != state.space->vertex_count()) {
        throw InvalidArgument(std::string(what) + " does not match the mesh");
    }
}

void check_data(const ForwardState& state, const DataField& w) {
    if (w.size() != state.measurement_count()) {
        throw InvalidArgument("data field has " + std::to_string(w.size()) +
                              " blocks, expected " + std::to_string(state.measurement_count()));
    }
    for (const auto& block : w) check_direction(state, block, "data block");
}

Vector solve_with_index(const ForwardState& state, std::size_t j, const Vector& rhs) {
    try {
        return state.solver->solve(rhs, true);
    } catch (const SolverError& e) {
        throw SolverError("measurement " + std::to_string(j + 1) + ": " + e.what(), e.residual());
    }
}

// Per-triangle dot product grad a . grad b.
Vector row_dot(const GradientField& a, const GradientField& b) {
    return a.cwiseProduct(b).rowwise().sum();
}

}  // namespace

NodalField linearized_potential(const ForwardState& state, std::size_t j, const NodalField& h) {
    check_direction(state, h, "direction");
    const FemSpace& space = *state.space;
    const Vector h_triangle = space.triangle_average(h.values);
    const Vector rhs =
        -space.gradient_load(h_triangle.cwiseProduct(space.areas()), state.potential_gradients.at(j));
    return NodalField(space.mesh_ptr(), solve_with_index(state, j, rhs));
}

DataField derivative_apply(const ForwardState& state, const NodalField& h) {
    check_direction(state, h, "direction");
    const FemSpace& space = *state.space;
    const Vector h_triangle = space.triangle_average(h.values);
    const std::size_t m = state.measurement_count();

    std::vector<Vector> blocks(m);
    parallel_for(m, [&](std::size_t j) {
        const GradientField& grad_u = state.potential_gradients[j];
        const Vector rhs = -space.gradient_load(h_triangle.cwiseProduct(space.areas()), grad_u);
        const Vector u_prime = solve_with_index(state, j, rhs);
        const Vector load =
            space.weighted_load(grad_u.rowwise().squaredNorm(), h.values) +
            space.weighted_load(2.0 * row_dot(grad_u, space.gradient(u_prime)), state.sigma.values);
        blocks[j] = load.cwiseQuotient(space.lumped_mass());
    });

    DataField out;
    out.reserve(m);
    for (auto& b : blocks) out.emplace_back(space.mesh_ptr(), std::move(b));
    return out;
}

namespace {

// Data residual mapped through the transpose of the lumped projection: z = D^-1 M w.
Vector dual_weights(const FemSpace& space, const Vector& w) {
    return (space.mass() * w).cwiseQuotient(space.lumped_mass());
}

Vector adjoint_state_values(const ForwardState& state, std::size_t j, const Vector& z) {
    const FemSpace& space = *state.space;
    const Vector pairing = space.product_integrals(z, state.sigma.values);
    const Vector rhs = -space.gradient_load(pairing, state.potential_gradients[j]);
    return solve_with_index(state, j, rhs);
}

}  // namespace

NodalField adjoint_state(const ForwardState& state, std::size_t j, const NodalField& w) {
    check_direction(state, w, "residual");
    if (j >= state.measurement_count()) throw InvalidArgument("measurement index out of range");
    const FemSpace& space = *state.space;
    return NodalField(space.mesh_ptr(),
                      adjoint_state_values(state, j, dual_weights(space, w.values)));
}

Vector adjoint_functional(const ForwardState& state, const DataField& w) {
    check_data(state, w);
    const FemSpace& space = *state.space;
    const std::size_t m = state.measurement_count();

    std::vector<Vector> contributions(m);
    parallel_for(m, [&](std::size_t j) {
        const GradientField& grad_u = state.potential_gradients[j];
        const Vector z = dual_weights(space, w[j].values);
        const Vector a = adjoint_state_values(state, j, z);
        contributions[j] =
            space.weighted_load(grad_u.rowwise().squaredNorm(), z) +
            space.average_transpose(
                2.0 * space.areas().cwiseProduct(row_dot(grad_u, space.gradient(a))));
    });

    Vector total = Vector::Zero(static_cast<Eigen::Index>(space.vertex_count()));
    for (const auto& c : contributions) total += c;
    return total;
}

NodalField adjoint_apply(const ForwardState& state, const DataField& w,
                         const EmbeddingAdjoint& riesz) {
    return NodalField(state.space->mesh_ptr(), riesz.solve_dual(adjoint_functional(state, w)));
}

double data_inner(const FemSpace& space, const DataField& a, const DataField& b) {
    if (a.size() != b.size()) throw InvalidArgument("data fields have different block counts");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += a[j].values.dot(space.mass() * b[j].values);
    return sum;
}

double data_norm(const FemSpace& space, const DataField& a) {
    return std::sqrt(std::max(0.0, data_inner(space, a, a)));
}

DataField data_difference(const DataField& a, const DataField& b) {
    if (a.size() != b.size()) throw InvalidArgument("data fields have different block counts");
    DataField out;
    out.reserve(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        out.emplace_back(a[j].mesh, a[j].values - b[j].values);
    }
    return out;
}

DataField data_scaled(const DataField& a, double factor) {
    DataField out;
    out.reserve(a.size());
    for (const auto& block : a) out.emplace_back(block.mesh, factor * block.values);
    return out;
}

}  // namespace aet
