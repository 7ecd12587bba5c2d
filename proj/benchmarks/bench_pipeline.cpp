#include "aet/fem.hpp"
#include "aet/forward.hpp"
#include "aet/illposed.hpp"
#include "aet/inversion.hpp"
#include "aet/mesh.hpp"
#include "aet/phantom.hpp"
#include "aet/sensitivity.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <numbers>
#include <random>

using namespace aet;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const Mesh> disk(int target) {
    static std::map<int, std::shared_ptr<const Mesh>> cache;
    auto& slot = cache[target];
    if (!slot) slot = std::make_shared<const Mesh>(generate_disk_mesh(target));
    return slot;
}

std::shared_ptr<FemSpace> space_for(int target) {
    static std::map<int, std::shared_ptr<FemSpace>> cache;
    auto& slot = cache[target];
    if (!slot) slot = std::make_shared<FemSpace>(disk(target));
    return slot;
}

Vector noise(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector v(n);
    for (auto& x : v) x = normal(rng);
    return v;
}

}  // namespace

static void BM_DiskMesh(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(generate_disk_mesh(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DiskMesh)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

static void BM_Stiffness(benchmark::State& state) {
    auto space = space_for(static_cast<int>(state.range(0)));
    const NodalField sigma = sample_phantom(default_phantom(), space->mesh_ptr());
    for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(*space, sigma, 0.1));
}
BENCHMARK(BM_Stiffness)->Arg(2000)->Arg(8000)->Unit(benchmark::kMicrosecond);

// Factorization plus three solves.
static void BM_ForwardSolve(benchmark::State& state) {
    auto space = space_for(static_cast<int>(state.range(0)));
    const ForwardModel model(space, MeasurementSet::trig(3, BoundaryArc(pi)));
    const NodalField sigma = sample_phantom(default_phantom(), space->mesh_ptr());
    for (auto _ : state) benchmark::DoNotOptimize(model.solve(sigma));
}
BENCHMARK(BM_ForwardSolve)->Arg(2000)->Arg(8000)->Arg(40000)->Unit(benchmark::kMillisecond);

static void BM_DerivativeApply(benchmark::State& state) {
    auto space = space_for(2000);
    const ForwardState fs = ForwardModel(space, MeasurementSet::trig(3, BoundaryArc(pi)))
                                .solve(sample_phantom(default_phantom(), space->mesh_ptr()));
    const NodalField h(space->mesh_ptr(), noise(static_cast<Eigen::Index>(space->vertex_count()), 1));
    for (auto _ : state) benchmark::DoNotOptimize(derivative_apply(fs, h));
}
BENCHMARK(BM_DerivativeApply)->Unit(benchmark::kMicrosecond);

static void BM_AdjointApply(benchmark::State& state) {
    auto space = space_for(2000);
    const auto mode = static_cast<InnerProductMode>(state.range(0));
    const InnerProductSpec spec = mode == InnerProductMode::L2   ? InnerProductSpec::l2()
                                  : mode == InnerProductMode::H2 ? InnerProductSpec::h2()
                                                                 : InnerProductSpec::h2_beta();
    const EmbeddingAdjoint riesz(space, spec);
    const ForwardState fs = ForwardModel(space, MeasurementSet::trig(3, BoundaryArc(pi)))
                                .solve(sample_phantom(default_phantom(), space->mesh_ptr()));
    DataField w;
    for (unsigned j = 0; j < 3; ++j) {
        w.emplace_back(space->mesh_ptr(), noise(static_cast<Eigen::Index>(space->vertex_count()), j));
    }
    for (auto _ : state) benchmark::DoNotOptimize(adjoint_apply(fs, w, riesz));
}
BENCHMARK(BM_AdjointApply)
    ->Arg(static_cast<int>(InnerProductMode::L2))
    ->Arg(static_cast<int>(InnerProductMode::H2Beta))
    ->Unit(benchmark::kMicrosecond);

static void BM_LandweberStep(benchmark::State& state) {
    auto space = space_for(2000);
    const MeasurementSet ms = MeasurementSet::trig(3, BoundaryArc(pi));
    const Landweber lw(space, ms, {});
    const DataField data = lw.model().solve(sample_phantom(default_phantom(), space->mesh_ptr())).power_densities;
    const NodalField sigma0 = NodalField::constant(space->mesh_ptr(), 1.5);
    for (auto _ : state) benchmark::DoNotOptimize(lw.step(sigma0, data));
}
BENCHMARK(BM_LandweberStep)->Unit(benchmark::kMillisecond);

static void BM_TransferMatrix(benchmark::State& state) {
    auto mesh = disk(static_cast<int>(state.range(0)));
    const NodalField sigma = sample_phantom(default_phantom(), mesh);
    const MeasurementSet ms = MeasurementSet::trig(3, BoundaryArc(pi));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_transfer_matrix(sigma, ms));
}
BENCHMARK(BM_TransferMatrix)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_TransferSvd(benchmark::State& state) {
    auto mesh = disk(static_cast<int>(state.range(0)));
    const TransferMatrix t = assemble_transfer_matrix(sample_phantom(default_phantom(), mesh),
                                                      MeasurementSet::trig(3, BoundaryArc(pi)));
    for (auto _ : state) benchmark::DoNotOptimize(svd_analyze(t.matrix));
}
BENCHMARK(BM_TransferSvd)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
