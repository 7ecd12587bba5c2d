#include "aet/forward.hpp"

#include "aet/error.hpp"
#include "aet/parallel.hpp"

#include <cmath>
#include <numbers>

namespace aet {

std::string to_string(CurrentFamily family) {
    return family == CurrentFamily::TrigLimited ? "trig" : "special";
}

CurrentFamily parse_current_family(const std::string& name) {
    if (name == "trig" || name == "trig_limited") return CurrentFamily::TrigLimited;
    if (name == "special" || name == "special_full") return CurrentFamily::SpecialFull;
    throw InvalidArgument("unknown current family '" + name + "'");
}

BoundaryCurrent::BoundaryCurrent(CurrentFamily family, int index, BoundaryArc arc)
    : family_(family), index_(index), arc_(arc) {
    if (family == CurrentFamily::TrigLimited && index < 1) {
        throw InvalidArgument("trigonometric current index must be >= 1");
    }
    if (family == CurrentFamily::SpecialFull) {
        if (index < 1 || index > 3) throw InvalidArgument("special current index must be 1, 2 or 3");
        arc_ = BoundaryArc::full();
    }
}

double BoundaryCurrent::operator()(double theta) const {
    const double t = wrap_angle(theta);
    if (family_ == CurrentFamily::TrigLimited) {
        if (!arc_.contains(t)) return 0.0;
        return std::sin(2.0 * index_ * std::numbers::pi * t / arc_.alpha());
    }
    switch (index_) {
        case 1:
            return std::sin(t);
        case 2:
            return std::cos(t);
        default:
            return (std::sin(t) + std::cos(t)) / std::numbers::sqrt2;
    }
}

MeasurementSet::MeasurementSet(std::vector<BoundaryCurrent> currents)
    : currents_(std::move(currents)) {
    if (currents_.empty()) throw InvalidArgument("measurement set must contain at least one current");
    for (const auto& c : currents_) {
        if (!(c.arc() == currents_.front().arc())) {
            throw InvalidArgument("all currents of a measurement set must share one arc");
        }
    }
}

MeasurementSet MeasurementSet::trig(const std::vector<int>& indices, BoundaryArc arc) {
    std::vector<BoundaryCurrent> currents;
    for (int j : indices) currents.push_back(BoundaryCurrent::trig(j, arc));
    return MeasurementSet(std::move(currents));
}

MeasurementSet MeasurementSet::trig(int count, BoundaryArc arc) {
    std::vector<int> indices;
    for (int j = 1; j <= count; ++j) indices.push_back(j);
    return trig(indices, arc);
}

MeasurementSet MeasurementSet::special(const std::vector<int>& indices) {
    std::vector<BoundaryCurrent> currents;
    for (int j : indices) currents.push_back(BoundaryCurrent::special(j));
    return MeasurementSet(std::move(currents));
}

MeasurementSet MeasurementSet::special(int count) {
    std::vector<int> indices;
    for (int j = 1; j <= count; ++j) indices.push_back(j);
    return special(indices);
}

// ---------------------------------------------------------------------------

ForwardModel::ForwardModel(std::shared_ptr<const FemSpace> space, MeasurementSet measurements,
                           double sigma_floor)
    : space_(std::move(space)), measurements_(std::move(measurements)), sigma_floor_(sigma_floor) {
    if (!(sigma_floor > 0.0)) throw InvalidArgument("conductivity floor must be positive");
    for (const auto& current : measurements_.currents()) {
        loads_.push_back(assemble_boundary_load(
            space_->mesh(), [&current](double theta) { return current(theta); }, current.arc()));
    }
}

ForwardState ForwardModel::solve(const NodalField& sigma) const {
    const auto stiffness = assemble_stiffness(*space_, sigma, sigma_floor_);

    ForwardState state;
    state.space = space_;
    state.sigma = sigma;
    state.sigma_triangle = space_->triangle_average(sigma.values);
    state.solver = std::make_shared<NeumannSolver>(stiffness, space_->lumped_mass());

    const std::size_t m = measurements_.size();
    std::vector<Vector> potentials(m);
    parallel_for(m, [&](std::size_t j) {
        try {
            potentials[j] = state.solver->solve(loads_[j], true);
        } catch (const SolverError& e) {
            throw SolverError("measurement " + std::to_string(j + 1) + ": " + e.what(),
                              e.residual());
        }
    });

    for (std::size_t j = 0; j < m; ++j) {
        state.potential_gradients.push_back(space_->gradient(potentials[j]));
        state.power_densities.emplace_back(
            space_->mesh_ptr(),
            power_density_values(*space_, sigma.values, state.potential_gradients[j]));
        state.potentials.emplace_back(space_->mesh_ptr(), std::move(potentials[j]));
    }
    return state;
}

ForwardState solve_measurement_set(const NodalField& sigma, const MeasurementSet& measurements,
                                   double sigma_floor) {
    ForwardModel model(std::make_shared<FemSpace>(sigma.mesh), measurements, sigma_floor);
    return model.solve(sigma);
}

Vector power_density_values(const FemSpace& space, const Vector& sigma,
                            const GradientField& gradient) {
    const Vector load = space.weighted_load(gradient.rowwise().squaredNorm(), sigma);
    return load.cwiseQuotient(space.lumped_mass());
}

NodalField power_density(const FemSpace& space, const NodalField& sigma, const NodalField& u) {
    if (sigma.size() != space.vertex_count() || u.size() != space.vertex_count()) {
        throw InvalidArgument("power density inputs do not match the mesh");
    }
    return NodalField(space.mesh_ptr(),
                      power_density_values(space, sigma.values, space.gradient(u.values)));
}

NodalField power_density(const NodalField& sigma, const NodalField& u) {
    return power_density(FemSpace(sigma.mesh), sigma, u);
}

DeterminantReport determinant_diagnostic(const FemSpace& space, const NodalField& u1,
                                         const NodalField& u2) {
    if (u1.size() != space.vertex_count() || u2.size() != space.vertex_count()) {
        throw InvalidArgument("determinant inputs do not match the mesh");
    }
    const GradientField g1 = space.gradient(u1.values);
    const GradientField g2 = space.gradient(u2.values);
    DeterminantReport report;
    report.per_triangle = g1.col(0).cwiseProduct(g2.col(1)) - g1.col(1).cwiseProduct(g2.col(0));
    report.min_abs = report.per_triangle.cwiseAbs().minCoeff();
    return report;
}

NodalField interpolate_field(const NodalField& source, std::shared_ptr<const Mesh> target) {
    const Mesh& from = *source.mesh;
    Vector values(static_cast<Eigen::Index>(target->vertex_count()));
    const auto& points = target->vertices();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t t = from.locate(points[i]);
        auto l = from.barycentric(t, points[i]);
        // Points outside the polygonal domain are clamped onto the nearest triangle.
        double sum = 0.0;
        for (double& c : l) {
            c = std::max(c, 0.0);
            sum += c;
        }
        const auto& tri = from.triangles()[t];
        double v = 0.0;
        for (int a = 0; a < 3; ++a) v += l[a] / sum * source.values(tri[a]);
        values(static_cast<Eigen::Index>(i)) = v;
    }
    return NodalField(std::move(target), std::move(values));
}

}  // namespace aet
