// Threaded cell operator against the serial reference, and the vector kernels.

#include <plates/corrector.hpp>

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace plates;

CellOperator laminate_operator(int n) {
    const RveSpec rve = make_laminate(LaminateSpec{});
    return CellOperator(CellData::build(rve, CellGrid::cube(n)), corrector_modes());
}

std::vector<double> random_vector(size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double &x : v) x = u(rng);
    return v;
}

void BM_apply(benchmark::State &state) {
    const CellOperator op = laminate_operator(static_cast<int>(state.range(0)));
    const auto x = random_vector(op.num_dofs());
    std::vector<double> y(x.size());
    for (auto _ : state) {
        op.apply(x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * op.grid().elements());
}

void BM_apply_reference(benchmark::State &state) {
    const CellOperator op = laminate_operator(static_cast<int>(state.range(0)));
    const auto x = random_vector(op.num_dofs());
    std::vector<double> y(x.size());
    for (auto _ : state) {
        op.apply_reference(x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * op.grid().elements());
}

void BM_dot(benchmark::State &state) {
    const auto a = random_vector(state.range(0)), b = random_vector(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(vec::dot(a, b));
    state.SetBytesProcessed(state.iterations() * state.range(0) * 2 * sizeof(double));
}

} // namespace

BENCHMARK(BM_apply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_reference)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot)->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
