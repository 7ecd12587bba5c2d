#include "aet/error.hpp"
#include "aet/phantom.hpp"
#include "aet/sensitivity.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace aet;
using aet::testing::disk;
using aet::testing::random_vector;

namespace {

constexpr double pi = std::numbers::pi;

DataField random_blocks(std::mt19937_64& rng, const std::shared_ptr<const Mesh>& mesh, std::size_t m) {
    DataField out;
    for (std::size_t j = 0; j < m; ++j) {
        out.emplace_back(mesh, random_vector(rng, static_cast<Eigen::Index>(mesh->vertex_count())));
    }
    return out;
}

double max_abs(const DataField& d) {
    double out = 0.0;
    for (const auto& b : d) out = std::max(out, b.values.cwiseAbs().maxCoeff());
    return out;
}

}  // namespace

TEST_CASE("constant-coefficient identities") {
    auto mesh = disk(2000);
    auto space = std::make_shared<FemSpace>(mesh);
    const auto n = static_cast<Eigen::Index>(mesh->vertex_count());
    ForwardModel model(space, MeasurementSet::special(1));

    for (double s : {0.7, 1.0, 2.0}) {
        const ForwardState state = model.solve(NodalField::constant(mesh, s));
        const double c = 0.3;
        const NodalField h = NodalField::constant(mesh, c);

        // K(c) = (c/s) K(s), hence u' = -(c/s) u.
        const NodalField up = linearized_potential(state, 0, h);
        const Vector expected = -(c / s) * state.potentials[0].values;
        CHECK((up.values - expected).norm() <= 1e-8 * expected.norm());

        // E(s) = 1/s, so F'(s) c = -c/s^2.
        const DataField dh = derivative_apply(state, h);
        const Vector target = Vector::Constant(n, -c / (s * s));
        CHECK(aet::testing::relative_l2(*space, dh[0].values, target) < 0.02);

        // L2 adjoint of a constant residual mirrors the derivative.
        EmbeddingAdjoint l2(space, InnerProductSpec::l2());
        const NodalField adj = adjoint_apply(state, {NodalField::constant(mesh, c)}, l2);
        CHECK(aet::testing::relative_l2(*space, adj.values, target) < 0.02);
    }

    // Adjoint state for sigma = 1 and a constant residual is -c u.
    const ForwardState unit = model.solve(NodalField::constant(mesh, 1.0));
    const NodalField a = adjoint_state(unit, 0, NodalField::constant(mesh, 0.8));
    const Vector expected = -0.8 * unit.potentials[0].values;
    CHECK((a.values - expected).norm() <= 1e-8 * expected.norm());
    const NodalField y = NodalField::sample(mesh, [](Point p) { return p.y; });
    CHECK(aet::testing::relative_l2(*space, a.values, -0.8 * y.values) < 0.02);
}

TEST_CASE("zero inputs and linearity") {
    auto mesh = disk(500);
    auto space = std::make_shared<FemSpace>(mesh);
    const auto n = static_cast<Eigen::Index>(mesh->vertex_count());
    std::mt19937_64 rng(21);
    const NodalField sigma = sample_phantom(default_phantom(), mesh);
    ForwardModel model(space, MeasurementSet::trig(3, BoundaryArc(pi)));
    const ForwardState state = model.solve(sigma);
    EmbeddingAdjoint riesz(space, InnerProductSpec::h2_beta());

    const NodalField zero = NodalField::constant(mesh, 0.0);
    CHECK(linearized_potential(state, 1, zero).values.norm() == 0.0);
    CHECK(max_abs(derivative_apply(state, zero)) == 0.0);
    CHECK(adjoint_state(state, 2, zero).values.norm() == 0.0);
    CHECK(adjoint_apply(state, {zero, zero, zero}, riesz).values.norm() == 0.0);

    const NodalField h(mesh, random_vector(rng, n));
    const NodalField h2(mesh, 2.0 * h.values);
    CHECK((linearized_potential(state, 0, h2).values - 2.0 * linearized_potential(state, 0, h).values)
              .norm() <= 1e-12 * linearized_potential(state, 0, h2).values.norm());
    const DataField d1 = derivative_apply(state, h), d2 = derivative_apply(state, h2);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK((d2[j].values - 2.0 * d1[j].values).norm() <= 1e-12 * d2[j].values.norm());
    }

    const DataField w = random_blocks(rng, mesh, 3);
    const NodalField a1 = adjoint_state(state, 1, w[1]);
    const NodalField a3 = adjoint_state(state, 1, NodalField(mesh, -3.0 * w[1].values));
    CHECK((a3.values + 3.0 * a1.values).norm() <= 1e-12 * a3.values.norm());
    const NodalField s1 = adjoint_apply(state, w, riesz);
    const NodalField s3 = adjoint_apply(state, data_scaled(w, -3.0), riesz);
    CHECK((s3.values + 3.0 * s1.values).norm() <= 1e-10 * s3.values.norm());

    CHECK_THROWS_AS(derivative_apply(state, NodalField::constant(disk(100), 1.0)), InvalidArgument);
    CHECK_THROWS_AS(adjoint_apply(state, {w[0]}, riesz), InvalidArgument);
    CHECK_THROWS_AS(adjoint_state(state, 5, w[0]), InvalidArgument);
}

TEST_CASE("Taylor remainder is second order") {
    auto mesh = disk(500);
    auto space = std::make_shared<FemSpace>(mesh);
    ForwardModel model(space, MeasurementSet::trig(3, BoundaryArc::full()));
    std::mt19937_64 rng(4);
    const NodalField sigma = NodalField::constant(mesh, 1.5);
    const NodalField h = aet::testing::smooth_random_field(rng, mesh, 0.6);
    CHECK(h.values.cwiseAbs().maxCoeff() <= 0.1);

    const ForwardState base = model.solve(sigma);
    const DataField dh = derivative_apply(base, h);
    std::vector<double> log_eps, log_rem;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const ForwardState moved = model.solve(NodalField(mesh, sigma.values + eps * h.values));
        const DataField rem = data_difference(data_difference(moved.power_densities, base.power_densities),
                                              data_scaled(dh, eps));
        log_eps.push_back(std::log10(eps));
        log_rem.push_back(std::log10(data_norm(*space, rem)));
    }
    // Least-squares slope.
    const double me = (log_eps[0] + log_eps[1] + log_eps[2] + log_eps[3]) / 4.0;
    const double mr = (log_rem[0] + log_rem[1] + log_rem[2] + log_rem[3]) / 4.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        num += (log_eps[i] - me) * (log_rem[i] - mr);
        den += (log_eps[i] - me) * (log_eps[i] - me);
    }
    const double slope = num / den;
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("adjoint identity across angles, measurement counts and inner products") {
    auto mesh = disk(500);
    auto space = std::make_shared<FemSpace>(mesh);
    const auto n = static_cast<Eigen::Index>(mesh->vertex_count());
    const NodalField sigma = sample_phantom(default_phantom(), mesh);
    std::mt19937_64 rng(8);

    const std::vector<InnerProductSpec> specs{InnerProductSpec::l2(), InnerProductSpec::h2(),
                                              InnerProductSpec::h2_beta()};
    std::vector<std::unique_ptr<EmbeddingAdjoint>> riesz;
    for (const auto& s : specs) riesz.push_back(std::make_unique<EmbeddingAdjoint>(space, s));

    double worst = 0.0;
    for (double alpha : {2.0 * pi, 1.5 * pi, pi, 0.5 * pi}) {
        for (int m = 1; m <= 3; ++m) {
            ForwardModel model(space, MeasurementSet::trig(m, BoundaryArc(alpha)));
            const ForwardState state = model.solve(sigma);
            for (const auto& r : riesz) {
                for (int trial = 0; trial < 5; ++trial) {
                    const NodalField h(mesh, random_vector(rng, n));
                    const DataField w = random_blocks(rng, mesh, static_cast<std::size_t>(m));
                    const DataField fh = derivative_apply(state, h);
                    const NodalField fw = adjoint_apply(state, w, *r);
                    const double lhs = data_inner(*space, fh, w);
                    const double rhs = r->inner(h.values, fw.values);
                    worst = std::max(worst, std::abs(lhs - rhs) /
                                                (data_norm(*space, fh) * data_norm(*space, w)));
                }
            }
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("data-space helpers") {
    auto mesh = disk(100);
    auto space = std::make_shared<FemSpace>(mesh);
    const DataField a{NodalField::constant(mesh, 2.0), NodalField::constant(mesh, 1.0)};
    const DataField b{NodalField::constant(mesh, 1.0), NodalField::constant(mesh, 1.0)};
    const double area = mesh->total_area();
    CHECK(data_inner(*space, a, b) == doctest::Approx(3.0 * area));
    CHECK(data_norm(*space, a) == doctest::Approx(std::sqrt(5.0 * area)));
    CHECK(max_abs(data_difference(a, a)) == 0.0);
    CHECK(data_scaled(a, 0.5)[0].values(0) == 1.0);
    CHECK_THROWS_AS(data_inner(*space, a, {b[0]}), InvalidArgument);
}
