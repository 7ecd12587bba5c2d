#pragma once

#include "aet/fem.hpp"
#include "aet/mesh.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace aet {

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, 6t^5 - 15t^4 + 10t^3 in between.
/// Twice continuously differentiable.
double c2_ramp(double t) noexcept;

struct Disc {
    Point center;
    double radius = 0.0;
};

/// Outer disc with an inner disc cut away.
struct Crescent {
    Disc outer;
    Disc inner;
};

/// Smooth inclusion reaching `plateau` in its interior; the ramp occupies the outer
/// `ramp_width` of each disc.
struct Inclusion {
    std::variant<Disc, Crescent> shape;
    double plateau = 1.0;
    double ramp_width = 0.06;
};

struct PhantomSpec {
    double background = 1.0;
    std::vector<Inclusion> inclusions;

    /// Throws AdmissibilityError if the background is below sigma_floor and
    /// InvalidArgument for non-positive radii or ramp widths not smaller than a radius.
    void validate(double sigma_floor) const;
};

/// C2 bump of a disc: c2_ramp((R - d) / w), d the distance to the centre.
double disc_bump(const Disc& disc, double ramp_width, Point p) noexcept;

/// background + sum_i (plateau_i - background) * bump_i(p).
double evaluate_phantom(const PhantomSpec& spec, Point p);

/// Default test conductivity: background 1, two discs with plateaus 2 and 1.3 and a
/// crescent with plateau 1.7.
PhantomSpec default_phantom();

NodalField sample_phantom(const PhantomSpec& spec, std::shared_ptr<const Mesh> mesh);

}  // namespace aet
