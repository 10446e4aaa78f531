#include <benchmark/benchmark.h>

#include "priorseg/phantom_gen.hpp"
#include "priorseg/prior_encoding.hpp"
#include "priorseg/surface_metrics.hpp"

using namespace priorseg;

namespace {

// Two offset ellipsoid masks scaled to the benchmark size.
std::pair<LabelMap, LabelMap> mask_pair(int n) {
    const std::array<int, 3> dims{n, n, n};
    const std::array<float, 3> spacing{0.98f, 0.98f, 3.0f};
    LabelMap a = LabelMap::zeros(dims, spacing);
    LabelMap b = LabelMap::zeros(dims, spacing);
    const double c = (n - 1) / 2.0;
    const double r = 0.35 * n;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dx = x - c, dy = y - c, dz = z - c;
                if (dx * dx + dy * dy + dz * dz <= r * r) a.at(x, y, z) = 1;
                const double ex = dx - 2, ey = dy + 1;
                if (ex * ex + ey * ey + dz * dz <= r * r) b.at(x, y, z) = 1;
            }
    return {std::move(a), std::move(b)};
}

void BM_EvaluatePair(benchmark::State& state) {
    const auto [gt, pred] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MetricResult r = evaluate_pair(gt, pred, 95.0);
        benchmark::DoNotOptimize(r);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvaluatePair)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Edt(benchmark::State& state) {
    const auto [gt, pred] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Volume3D d = edt(gt);
        benchmark::DoNotOptimize(d.data.data());
    }
}
BENCHMARK(BM_Edt)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Dice(benchmark::State& state) {
    const auto [gt, pred] = mask_pair(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        double d = dice(gt, pred);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_Dice)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ZScore(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Volume3D v = Volume3D::zeros({n, n, n}, {1.0f, 1.0f, 1.0f});
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = static_cast<double>(i % 251);
    for (auto _ : state) {
        auto [z, s] = zscore(v);
        benchmark::DoNotOptimize(z.data.data());
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_ZScore)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_PhantomPatient(benchmark::State& state) {
    PhantomSpec spec;
    spec.dims = {64, 64, 96};
    for (auto _ : state) {
        PatientVolumes pv = generate_patient_volumes(spec, Sex::Female, 0);
        benchmark::DoNotOptimize(pv.gt_ctv.data.data());
    }
}
BENCHMARK(BM_PhantomPatient)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
