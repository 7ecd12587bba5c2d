#include "aet/error.hpp"
#include "aet/inversion.hpp"
#include "aet/phantom.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace aet;
using aet::testing::disk;

namespace {

constexpr double pi = std::numbers::pi;

struct Setup {
    std::shared_ptr<const Mesh> mesh = disk(500);
    std::shared_ptr<FemSpace> space = std::make_shared<FemSpace>(mesh);
    NodalField truth = sample_phantom(default_phantom(), mesh);
    MeasurementSet ms;
    DataField exact;

    explicit Setup(double alpha = 2.0 * pi)
        : ms(MeasurementSet::trig(3, BoundaryArc(alpha))) {
        // Data from a finer mesh, interpolated back.
        auto fine = disk(2000);
        const ForwardState state = solve_measurement_set(sample_phantom(default_phantom(), fine), ms);
        for (const auto& e : state.power_densities) exact.push_back(interpolate_field(e, mesh));
    }
};

bool residuals_nonincreasing(const IterationLog& log) {
    for (std::size_t i = 1; i < log.records.size(); ++i) {
        if (log.records[i].residual > log.records[i - 1].residual) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("noise injection") {
    Setup s;
    const NoisyData clean = add_noise(*s.space, s.exact, 0.0, 1);
    CHECK(clean.delta_abs == 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK((clean.data[j].values - s.exact[j].values).norm() == 0.0);

    const double norm = data_norm(*s.space, s.exact);
    const NoisyData a = add_noise(*s.space, s.exact, 0.05, 1);
    const NoisyData b = add_noise(*s.space, s.exact, 0.05, 2);
    const NoisyData a2 = add_noise(*s.space, s.exact, 0.05, 1);
    const double da = data_norm(*s.space, data_difference(a.data, s.exact));
    const double db = data_norm(*s.space, data_difference(b.data, s.exact));
    CHECK(da / norm == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(db == doctest::Approx(da).epsilon(1e-12));
    CHECK(a.delta_abs == doctest::Approx(0.05 * norm).epsilon(1e-14));
    CHECK((a.data[0].values - b.data[0].values).norm() > 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK((a.data[j].values - a2.data[j].values).norm() == 0.0);

    CHECK_THROWS_AS(add_noise(*s.space, s.exact, -0.1, 1), InvalidArgument);
}

TEST_CASE("configuration validation") {
    ReconstructionConfig c;
    CHECK_NOTHROW(c.validate());
    c.tau = 0.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.sigma_floor = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.sigma0 = 0.05;
    CHECK_THROWS_AS(c.validate(), AdmissibilityError);
    CHECK(to_string(StopReason::Discrepancy) == "discrepancy");
    CHECK(to_string(StopReason::MaxIter) == "max_iter");
    CHECK(to_string(StopReason::ZeroGradient) == "zero_gradient");
}

TEST_CASE("single steepest-descent step") {
    Setup s;
    ReconstructionConfig cfg;
    Landweber lw(s.space, s.ms, cfg);
    const NodalField sigma0 = NodalField::constant(s.mesh, 1.5);

    // Exact data at the current iterate: no gradient.
    const DataField at_sigma0 = lw.model().solve(sigma0).power_densities;
    const StepResult still = lw.step(sigma0, at_sigma0);
    CHECK(still.zero_gradient);
    CHECK(still.residual == 0.0);

    const StepResult step = lw.step(sigma0, s.exact);
    CHECK_FALSE(step.zero_gradient);
    CHECK(step.omega > 0.0);
    CHECK(step.sigma_next.values.minCoeff() >= cfg.sigma_floor);

    // s is a descent direction: a short step along it lowers the residual.
    const DescentDirection dir = descent_direction(lw.model().solve(sigma0),
                                                   data_difference(s.exact, at_sigma0), lw.riesz());
    const NodalField nudged(s.mesh, sigma0.values + 0.05 * dir.omega * dir.direction.values);
    const double after = data_norm(*s.space, data_difference(s.exact, lw.model().solve(nudged).power_densities));
    CHECK(after < step.residual);

    // Scaling the residual by a scales the direction by a and leaves omega unchanged.
    const ForwardState state = lw.model().solve(sigma0);
    const DataField r = data_difference(s.exact, state.power_densities);
    const DescentDirection d1 = descent_direction(state, r, lw.riesz());
    const DescentDirection d2 = descent_direction(state, data_scaled(r, 2.0), lw.riesz());
    CHECK(d2.omega == doctest::Approx(d1.omega).epsilon(1e-10));
    CHECK((d2.omega * d2.direction.values - 2.0 * d1.omega * d1.direction.values).norm() <=
          1e-9 * (d1.omega * d1.direction.values).norm());
}

TEST_CASE("discrepancy stop at the initial guess") {
    Setup s;
    ReconstructionConfig cfg;
    Landweber lw(s.space, s.ms, cfg);
    const DataField data = lw.model().solve(NodalField::constant(s.mesh, 1.5)).power_densities;
    const auto result = lw.run(data, 1e-3);
    CHECK(result.log.stop == StopReason::Discrepancy);
    CHECK(result.log.stopping_index() == 0);
    CHECK((result.sigma.values.array() - 1.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("noise-free run improves on the initial guess") {
    Setup s;
    ReconstructionConfig cfg;
    cfg.max_iter = 60;
    Landweber lw(s.space, s.ms, cfg);
    const auto result = lw.run(s.exact, 0.0, s.truth);
    const auto& log = result.log;
    CHECK(log.stop == StopReason::MaxIter);
    CHECK(log.records.size() == 61);
    CHECK(log.records.back().rel_error < log.records.front().rel_error);
    CHECK(residuals_nonincreasing(log));
    CHECK(result.sigma.values.minCoeff() >= cfg.sigma_floor);
    for (const auto& rec : log.records) CHECK(rec.residual >= 0.0);
}

TEST_CASE("noisy run stops by the discrepancy principle, deterministically") {
    Setup s;
    const NoisyData noisy = add_noise(*s.space, s.exact, 0.05, 7);
    ReconstructionConfig cfg;
    cfg.max_iter = 500;
    Landweber lw(s.space, s.ms, cfg);
    const auto first = lw.run(noisy.data, noisy.delta_abs, s.truth);
    CHECK(first.log.stop == StopReason::Discrepancy);
    CHECK(first.log.final_residual() <= cfg.tau * noisy.delta_abs);
    CHECK(residuals_nonincreasing(first.log));

    const auto second = lw.run(noisy.data, noisy.delta_abs, s.truth);
    REQUIRE(second.log.records.size() == first.log.records.size());
    for (std::size_t i = 0; i < first.log.records.size(); ++i) {
        CHECK(second.log.records[i].residual == first.log.records[i].residual);
        CHECK(second.log.records[i].omega == first.log.records[i].omega);
    }
    CHECK((second.sigma.values - first.sigma.values).norm() == 0.0);

    std::ostringstream a, b;
    write_iteration_log(a, first.log);
    write_iteration_log(b, second.log);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("k,residual,omega,rel_error\n", 0) == 0);
}

TEST_CASE("initial field and clamping") {
    auto mesh = disk(100);
    Vector v = Vector::Constant(static_cast<Eigen::Index>(mesh->vertex_count()), 1.0);
    v(3) = -2.0;
    const NodalField c = clamp_below(NodalField(mesh, v), 0.1);
    CHECK(c.values(3) == 0.1);
    CHECK(c.values(0) == 1.0);

    Setup s;
    ReconstructionConfig cfg;
    cfg.max_iter = 1;
    cfg.initial_field = NodalField::constant(s.mesh, 1.2);
    Landweber lw(s.space, s.ms, cfg);
    const auto result = lw.run(s.exact, 0.0, s.truth);
    const double expected = aet::testing::relative_l2(
        *s.space, Vector::Constant(static_cast<Eigen::Index>(s.mesh->vertex_count()), 1.2), s.truth.values);
    CHECK(result.log.records.front().rel_error == doctest::Approx(expected));
    CHECK_THROWS_AS(lw.run({s.exact[0]}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(lw.run(s.exact, -1.0), InvalidArgument);
}
