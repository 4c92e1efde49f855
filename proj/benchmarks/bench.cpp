#include <benchmark/benchmark.h>

#include "kcq/nehari.hpp"
#include "kcq/rng.hpp"
#include "kcq/solver.hpp"

using namespace kcq;

namespace {

const KernelTable& bench_kernel(int M) {
    static const KernelTable k8 = build_kernel(2.0, 8, QuadratureSpec{64, 2});
    static const KernelTable k16 = build_kernel(2.0, 16, QuadratureSpec{64, 2});
    return M <= 8 ? k8 : k16;
}

void BM_BuildKernel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{n, 2});
        benchmark::DoNotOptimize(ker.canonical.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildKernel)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_ConvolveDirect(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const BoxDomain dom = BoxDomain::centered(L);
    const KernelTable& ker = bench_kernel(L - 1);
    Rng rng(1);
    const Field w = random_field(dom, rng);
    for (auto _ : state) {
        Field out = convolve_direct(ker, dom, w);
        benchmark::DoNotOptimize(out.values.data());
    }
    state.SetComplexityN(dom.vertex_count());
}
BENCHMARK(BM_ConvolveDirect)->Arg(5)->Arg(7)->Arg(9)->Complexity();

void BM_ConvolveFft(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const BoxDomain dom = BoxDomain::centered(L);
    const KernelTable& ker = bench_kernel(L - 1);
    Rng rng(1);
    const Field w = random_field(dom, rng);
    for (auto _ : state) {
        Field out = convolve_fft(ker, dom, w);
        benchmark::DoNotOptimize(out.values.data());
    }
    state.SetComplexityN(dom.vertex_count());
}
BENCHMARK(BM_ConvolveFft)->Arg(5)->Arg(7)->Arg(9)->Arg(13)->Complexity();

void BM_EnergyEval(benchmark::State& state) {
    const BoxDomain dom = BoxDomain::centered(9);
    const KernelTable& ker = bench_kernel(8);
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    Rng rng(2);
    const Field u = random_field(dom, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(energy_J(P, h1, ker, dom, u));
    }
}
BENCHMARK(BM_EnergyEval);

void BM_PairProjection(benchmark::State& state) {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = bench_kernel(4);
    Params P;
    P.p = 5.0;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    Rng rng(3);
    const Field u = random_sign_changing_field(dom, rng);
    const SignCoeffs c = sign_coeffs(P, h1, ker, dom, u);
    for (auto _ : state) {
        PairProjection pp = project_pair(c, 1e-12 * (c.Aplus + c.Aminus));
        benchmark::DoNotOptimize(pp.s_u);
    }
}
BENCHMARK(BM_PairProjection);

void BM_GroundSolve5(benchmark::State& state) {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = bench_kernel(4);
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    SolveConfig cfg;
    for (auto _ : state) {
        auto [u, rep] = solve_ground(P, h1, ker, dom, cfg);
        benchmark::DoNotOptimize(rep.energy);
    }
}
BENCHMARK(BM_GroundSolve5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
