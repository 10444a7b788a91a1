#include <benchmark/benchmark.h>

#include "treebec/graph.hpp"
#include "treebec/kernels.hpp"
#include "treebec/spectral.hpp"

using namespace treebec;

namespace {

const graph::Model& model(int n) {
    static std::vector<std::pair<int, graph::Model>> cache;
    for (auto& [k, m] : cache)
        if (k == n) return m;
    cache.emplace_back(n, graph::build_model({graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit}, n));
    return cache.back().second;
}

Vec ramp(std::int64_t n) {
    Vec x(n);
    for (std::int64_t i = 0; i < n; ++i) x[i] = 1.0 / (1.0 + i % 97);
    return x;
}

template <auto Spmv>
void BM_spmv(benchmark::State& state) {
    const auto& m = model(static_cast<int>(state.range(0)));
    const auto x = ramp(m.size());
    Vec y(m.size());
    for (auto _ : state) {
        Spmv(m.adjacency, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * m.adjacency.nnz());
}

template <auto Dot>
void BM_dot(benchmark::State& state) {
    const auto x = ramp(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Dot(x, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Axpy>
void BM_axpy(benchmark::State& state) {
    const auto x = ramp(state.range(0));
    Vec y(x.size(), 0.0);
    for (auto _ : state) {
        Axpy(1e-9, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_evolve(benchmark::State& state) {
    const auto& m = model(static_cast<int>(state.range(0)));
    CVec u(m.size(), 0.0);
    u[0] = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(spectral::evolve(m.adjacency, 5.0, u, 3.4));
}

using SpmvFn = void (*)(const CsrMatrix&, std::span<const double>, std::span<double>);
constexpr SpmvFn serial_spmv = serial::spmv;
constexpr SpmvFn parallel_spmv = parallel::spmv;

}  // namespace

BENCHMARK(BM_spmv<serial_spmv>)->Name("spmv/serial")->Arg(12)->Arg(16);
BENCHMARK(BM_spmv<parallel_spmv>)->Name("spmv/parallel")->Arg(12)->Arg(16);
BENCHMARK(BM_dot<serial::dot>)->Name("dot/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_dot<parallel::dot>)->Name("dot/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_axpy<serial::axpy>)->Name("axpy/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_axpy<parallel::axpy>)->Name("axpy/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_evolve)->Name("evolve/parallel")->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
