#include <benchmark/benchmark.h>

#include "refract/occupation.hpp"
#include "refract/scale_functions.hpp"
#include "refract/simulator.hpp"

using namespace refract;

namespace {

RefractedModel cl1() { return {LevyModel::from_bv_drift(2.0, {1.0, JumpLaw(ExponentialLaw{1.0})}), 0.5, 0.0}; }
RefractedModel bm1() { return {LevyModel(1.0, 2.0, JumpSpec::none()), 0.5, 0.0}; }

void BM_exact_paths(benchmark::State& st) {
    const auto m = cl1();
    const Window w{-1.0, 2.0};
    const bool par = st.range(0) != 0;
    for (auto _ : st) {
        auto out = par ? simulate_paths_parallel(m, std::span(&w, 1), 20000, Scheme::exact(), 1)
                       : simulate_paths_serial(m, std::span(&w, 1), 20000, Scheme::exact(), 1);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * 20000);
}
BENCHMARK(BM_exact_paths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_euler_paths(benchmark::State& st) {
    const auto m = bm1();
    const Window w{-1.0, 1.0};
    const bool par = st.range(0) != 0;
    for (auto _ : st) {
        auto out = par ? simulate_paths_parallel(m, std::span(&w, 1), 2000, Scheme::euler(1e-3), 1)
                       : simulate_paths_serial(m, std::span(&w, 1), 2000, Scheme::euler(1e-3), 1);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * 2000);
}
BENCHMARK(BM_euler_paths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_tabulate(benchmark::State& st) {
    const ScaleFunctionSet s(cl1().y(), 0.5, ScaleBackend::numeric);
    const bool par = st.range(0) != 0;
    for (auto _ : st) {
        auto t = par ? s.tabulate_parallel() : s.tabulate_serial();
        benchmark::DoNotOptimize(t.data());
    }
}
BENCHMARK(BM_tabulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_theorem1(benchmark::State& st) {
    const auto m = cl1();
    for (auto _ : st) benchmark::DoNotOptimize(theorem1_lt(m, 1.0, -1.0, 2.0).value);
}
BENCHMARK(BM_theorem1)->Unit(benchmark::kMicrosecond);

void BM_density(benchmark::State& st) {
    const auto m = cl1();
    for (auto _ : st) benchmark::DoNotOptimize(occupation_density(m).mass);
}
BENCHMARK(BM_density)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
