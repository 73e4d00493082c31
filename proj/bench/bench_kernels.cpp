// Serial reference vs OpenMP kernels, plus the aggregated sampler.

#include <benchmark/benchmark.h>

#include "mpcl/harness.hpp"

using namespace mpcl;

namespace {

struct Fixture {
    Instance inst = threshold_audit_instance(1, 1);
    std::vector<Hypothesis> hyps{make_table(std::vector<std::uint8_t>(64, 1)), make_table(std::vector<std::uint8_t>(64, 0))};
    StageView view{inst.tasks[0], hyps};
    Thresholds anchors{{1, PointId{20}, std::uint64_t{1} << 62}, {1, PointId{40}, 0}};
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void quantile(benchmark::State& state, Kernel kernel) {
    const auto& f = fixture();
    const auto m = static_cast<std::uint64_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantile_kernel(f.view, f.anchors, 2, 0.05, m, Rng(++seed), kernel));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}

void weight(benchmark::State& state, Kernel kernel) {
    const auto& f = fixture();
    const auto m = static_cast<std::uint64_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(weight_kernel(f.view, f.anchors, 1, 1, m, Rng(++seed), kernel));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}

void vc_search(benchmark::State& state, Exec exec) {
    const LineClass cls(LineClassSpec{2, 2, 3});
    for (auto _ : state) benchmark::DoNotOptimize(vc_dimension_bruteforce(cls, cls.universe_size(), 6, kDefaultSubsetLimit, exec));
}

void trials(benchmark::State& state, Exec exec) {
    auto cfg = preset_config("line-tiny");
    cfg.trials = 4;
    for (auto _ : state) benchmark::DoNotOptimize(run_trials(cfg, cfg.c, exec));
}

}  // namespace

BENCHMARK_CAPTURE(quantile, literal_serial, Kernel::literal_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(quantile, literal_parallel, Kernel::literal_parallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(quantile, aggregated, Kernel::aggregated)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(weight, literal_serial, Kernel::literal_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(weight, literal_parallel, Kernel::literal_parallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(weight, aggregated, Kernel::aggregated)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(vc_search, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(vc_search, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(trials, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(trials, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
