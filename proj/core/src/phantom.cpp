#include "aet/phantom.hpp"

#include "aet/error.hpp"

#include <cmath>
#include <sstream>

namespace aet {

double c2_ramp(double t) noexcept {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double disc_bump(const Disc& disc, double ramp_width, Point p) noexcept {
    const double d = std::hypot(p.x - disc.center.x, p.y - disc.center.y);
    return c2_ramp((disc.radius - d) / ramp_width);
}

void PhantomSpec::validate(double sigma_floor) const {
    if (background < sigma_floor) {
        std::ostringstream msg;
        msg << "phantom background " << background << " is below the admissibility floor "
            << sigma_floor;
        throw AdmissibilityError(msg.str());
    }
    auto check_disc = [](const Disc& d, double w) {
        if (!(d.radius > 0.0)) throw InvalidArgument("inclusion radius must be positive");
        if (!(w > 0.0) || !(w < d.radius)) {
            throw InvalidArgument("ramp width must be positive and smaller than the radius");
        }
    };
    for (const auto& inc : inclusions) {
        if (const auto* disc = std::get_if<Disc>(&inc.shape)) {
            check_disc(*disc, inc.ramp_width);
        } else {
            const auto& crescent = std::get<Crescent>(inc.shape);
            check_disc(crescent.outer, inc.ramp_width);
            check_disc(crescent.inner, inc.ramp_width);
        }
        if (inc.plateau < sigma_floor) {
            throw AdmissibilityError("inclusion plateau is below the admissibility floor");
        }
    }
}

double evaluate_phantom(const PhantomSpec& spec, Point p) {
    double value = spec.background;
    for (const auto& inc : spec.inclusions) {
        double bump;
        if (const auto* disc = std::get_if<Disc>(&inc.shape)) {
            bump = disc_bump(*disc, inc.ramp_width, p);
        } else {
            const auto& crescent = std::get<Crescent>(inc.shape);
            bump = disc_bump(crescent.outer, inc.ramp_width, p) *
                   (1.0 - disc_bump(crescent.inner, inc.ramp_width, p));
        }
        value += (inc.plateau - spec.background) * bump;
    }
    return value;
}

PhantomSpec default_phantom() {
    PhantomSpec spec;
    spec.background = 1.0;
    spec.inclusions.push_back({Disc{{0.4, 0.25}, 0.25}, 2.0, 0.06});
    spec.inclusions.push_back({Disc{{-0.1, -0.45}, 0.15}, 1.3, 0.06});
    spec.inclusions.push_back(
        {Crescent{Disc{{-0.35, 0.3}, 0.3}, Disc{{-0.2, 0.35}, 0.25}}, 1.7, 0.06});
    return spec;
}

NodalField sample_phantom(const PhantomSpec& spec, std::shared_ptr<const Mesh> mesh) {
    return NodalField::sample(std::move(mesh), [&spec](Point p) { return evaluate_phantom(spec, p); });
}

}  // namespace aet
