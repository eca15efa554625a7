// Microbenchmarks for the hot paths of the core library: pointwise geometry,
// functional quadratures, one flow step, and the support-function projection.

#include <benchmark/benchmark.h>

#include <cmath>

#include "hgf/flow.hpp"
#include "hgf/hyperbolic.hpp"
#include "hgf/klein.hpp"
#include "hgf/sphere_grid.hpp"

using namespace hgf;

namespace {

RadialSurface perturbed_body(int ntheta) {
    auto g = make_grid(2, ntheta, 2 * ntheta);
    RadialSurface s;
    s.rho = ScalarField(g);
    for (int k = 0; k < g->nodes(); ++k) {
        double c = std::cos(g->node_theta(k));
        s.rho.v[k] = 1.0 + 0.1 * 0.5 * (3.0 * c * c - 1.0);
    }
    return s;
}

void BM_Geometry(benchmark::State& state) {
    RadialSurface s = perturbed_body(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(geometry(s));
    state.SetItemsProcessed(state.iterations() * s.rho.grid->nodes());
}
BENCHMARK(BM_Geometry)->Arg(16)->Arg(32)->Arg(64);

void BM_Laplacian(benchmark::State& state) {
    RadialSurface s = perturbed_body(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(laplacian(s.rho));
    state.SetItemsProcessed(state.iterations() * s.rho.grid->nodes());
}
BENCHMARK(BM_Laplacian)->Arg(16)->Arg(32)->Arg(64);

void BM_Quermassintegrals(benchmark::State& state) {
    RadialSurface s = perturbed_body(static_cast<int>(state.range(0)));
    SurfaceGeometry geom = geometry(s);
    double vol = enclosed_volume(s);
    for (auto _ : state) benchmark::DoNotOptimize(quermassintegrals(geom, vol));
}
BENCHMARK(BM_Quermassintegrals)->Arg(16)->Arg(32)->Arg(64);

void BM_FlowStep(benchmark::State& state) {
    FlowConfig cfg;
    FlowState st = make_state(perturbed_body(static_cast<int>(state.range(0))), cfg);
    for (auto _ : state) benchmark::DoNotOptimize(step(st, cfg));
}
BENCHMARK(BM_FlowStep)->Arg(16)->Arg(32)->Arg(64);

void BM_Project(benchmark::State& state) {
    RadialSurface s = perturbed_body(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(project(s));
    state.SetItemsProcessed(state.iterations() * s.rho.grid->nodes());
}
BENCHMARK(BM_Project)->Arg(16)->Arg(32);

} // namespace

BENCHMARK_MAIN();
