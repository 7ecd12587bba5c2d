#pragma once

#include "aet/fem.hpp"
#include "aet/mesh.hpp"

#include <memory>
#include <string>
#include <vector>

namespace aet {

enum class CurrentFamily {
    /// sin(2 j pi theta / alpha) on [0, alpha], zero elsewhere.
    TrigLimited,
    /// sin(theta), cos(theta), (sin(theta) + cos(theta)) / sqrt(2) on the full circle.
    SpecialFull,
};

std::string to_string(CurrentFamily family);
CurrentFamily parse_current_family(const std::string& name);

/// Prescribed normal current density on the unit circle.
class BoundaryCurrent {
public:
    BoundaryCurrent(CurrentFamily family, int index, BoundaryArc arc = BoundaryArc::full());

    static BoundaryCurrent trig(int index, BoundaryArc arc) {
        return {CurrentFamily::TrigLimited, index, arc};
    }
    static BoundaryCurrent special(int index) { return {CurrentFamily::SpecialFull, index}; }

    CurrentFamily family() const noexcept { return family_; }
    int index() const noexcept { return index_; }
    /// Support of the current. The special family always uses the full circle.
    const BoundaryArc& arc() const noexcept { return arc_; }

    double operator()(double theta) const;

private:
    CurrentFamily family_;
    int index_;
    BoundaryArc arc_;
};

/// Ordered list of boundary currents, non-empty, sharing one arc.
class MeasurementSet {
public:
    explicit MeasurementSet(std::vector<BoundaryCurrent> currents);

    /// g_j for j in `indices` (1-based), trig family on `arc`.
    static MeasurementSet trig(const std::vector<int>& indices, BoundaryArc arc);
    static MeasurementSet trig(int count, BoundaryArc arc);
    static MeasurementSet special(const std::vector<int>& indices);
    static MeasurementSet special(int count);

    std::size_t size() const noexcept { return currents_.size(); }
    const BoundaryCurrent& operator[](std::size_t j) const { return currents_.at(j); }
    const std::vector<BoundaryCurrent>& currents() const noexcept { return currents_; }
    const BoundaryArc& arc() const noexcept { return currents_.front().arc(); }

private:
    std::vector<BoundaryCurrent> currents_;
};

/// Data-space element: one nodal field per measurement.
using DataField = std::vector<NodalField>;

/// Potentials and power densities for one conductivity. Read-only once produced.
struct ForwardState {
    std::shared_ptr<const FemSpace> space;
    NodalField sigma;
    Vector sigma_triangle;
    std::shared_ptr<const NeumannSolver> solver;
    std::vector<NodalField> potentials;
    std::vector<GradientField> potential_gradients;
    DataField power_densities;

    std::size_t measurement_count() const noexcept { return potentials.size(); }
};

/// Forward operator sigma -> (E_1, ..., E_M) on a fixed mesh and measurement set.
class ForwardModel {
public:
    ForwardModel(std::shared_ptr<const FemSpace> space, MeasurementSet measurements,
                 double sigma_floor = 0.1);

    const FemSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const FemSpace>& space_ptr() const noexcept { return space_; }
    const MeasurementSet& measurements() const noexcept { return measurements_; }
    double sigma_floor() const noexcept { return sigma_floor_; }
    /// Assembled boundary load of measurement j.
    const Vector& load(std::size_t j) const { return loads_.at(j); }

    ForwardState solve(const NodalField& sigma) const;

private:
    std::shared_ptr<const FemSpace> space_;
    MeasurementSet measurements_;
    double sigma_floor_;
    std::vector<Vector> loads_;
};

ForwardState solve_measurement_set(const NodalField& sigma, const MeasurementSet& measurements,
                                   double sigma_floor = 0.1);

/// Power density sigma |grad u|^2 as a vertex field, by lumped L2 projection:
/// E_i = int sigma |grad u|^2 phi_i / int phi_i, integrated exactly for P1 sigma.
/// Nonnegative whenever sigma is, and exact for constant sigma and linear u.
Vector power_density_values(const FemSpace& space, const Vector& sigma,
                            const GradientField& gradient);
NodalField power_density(const FemSpace& space, const NodalField& sigma, const NodalField& u);
NodalField power_density(const NodalField& sigma, const NodalField& u);

struct DeterminantReport {
    /// det(grad u1, grad u2) per triangle.
    Vector per_triangle;
    double min_abs = 0.0;
};

DeterminantReport determinant_diagnostic(const FemSpace& space, const NodalField& u1,
                                         const NodalField& u2);

/// Barycentric interpolation of a P1 field onto the vertices of another mesh.
NodalField interpolate_field(const NodalField& source, std::shared_ptr<const Mesh> target);

}  // namespace aet
