#include <benchmark/benchmark.h>

#include "bilevel/harness.hpp"
#include "bilevel/kernels.hpp"
#include "bilevel/rng.hpp"

namespace {

using namespace bilevel;

// Regression-sized shape: 801 training rows by 730 features.
constexpr Eigen::Index kRows = 801;
constexpr Eigen::Index kCols = 730;

struct Data {
    Matrix a;
    kernels::RowMatrix a_rows;
    Vector x;
    Vector r;
};

const Data& data() {
    static const Data d = [] {
        Pcg32 rng(11, kStreamData);
        Data out;
        out.a = rng.normal_matrix(kRows, kCols);
        out.a_rows = out.a;
        out.x = rng.normal_vector(kCols);
        out.r = rng.normal_vector(kRows);
        return out;
    }();
    return d;
}

void BM_gemv(benchmark::State& state, kernels::Backend backend) {
    const Data& d = data();
    Vector out(kRows);
    for (auto _ : state) {
        kernels::gemv(d.a_rows, d.x, out, backend);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows * kCols);
}

void BM_gemv_transposed(benchmark::State& state, kernels::Backend backend) {
    const Data& d = data();
    Vector out(kCols);
    for (auto _ : state) {
        kernels::gemv_transposed(d.a, d.r, out, backend);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows * kCols);
}

void BM_least_squares_gradient(benchmark::State& state) {
    const Data& d = data();
    const LeastSquares g(d.a, d.r, 1.0);
    for (auto _ : state) {
        Vector grad = g.gradient(d.x);
        benchmark::DoNotOptimize(grad.data());
    }
}

void BM_agm_bio_min_norm(benchmark::State& state) {
    const MinNormProblem mn = make_min_norm_synthetic(200, 400, 2.0, 7);
    SolverConfig config;
    config.K = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        SolveResult r = solve(mn.problem, config);
        benchmark::DoNotOptimize(r.x.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_gemv, serial, bilevel::kernels::Backend::Serial);
BENCHMARK_CAPTURE(BM_gemv, parallel, bilevel::kernels::Backend::Parallel);
BENCHMARK_CAPTURE(BM_gemv_transposed, serial, bilevel::kernels::Backend::Serial);
BENCHMARK_CAPTURE(BM_gemv_transposed, parallel, bilevel::kernels::Backend::Parallel);
BENCHMARK(BM_least_squares_gradient);
BENCHMARK(BM_agm_bio_min_norm)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
