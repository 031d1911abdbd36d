// Serial reference vs OpenMP variant for each data-parallel kernel.

#include "encctl/bootpoly.hpp"
#include "encctl/kernels.hpp"
#include "encctl/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace encctl;

namespace {

const BootstrapPolynomial& poly() {
    static const BootstrapPolynomial p = fit(BootstrapSpec{});
    return p;
}

const std::vector<double>& points() {
    static const std::vector<double> pts = verification_points(BootstrapSpec{}, 200000, 1);
    return pts;
}

SimulationConfig trial_config() {
    SimulationConfig cfg;
    auto m = [](int r, int c, std::initializer_list<double> v) {
        Matrix out(r, c);
        auto it = v.begin();
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) out(i, j) = *it++;
        return out;
    };
    cfg.plant = {m(2, 2, {-0.5, 0.1, 0.0, -0.2}), m(2, 1, {0.0, 1.0}), m(2, 1, {1.0, 1.0}), m(1, 2, {1.0, 0.0}),
                 m(1, 1, {0.0}), Matrix::Identity(2, 2), m(2, 1, {1.0, 1.0}), Matrix::Zero(2, 1)};
    cfg.controller = {m(2, 2, {0.13, 0.1, -1.27, 0.15}), m(2, 1, {0.63, -0.27}), Matrix::Identity(2, 2),
                      m(1, 2, {-1.0, 0.35}), Matrix::Zero(1, 1), Matrix::Zero(1, 2)};
    cfg.mode = SimMode::Encrypted;
    cfg.poly = poly();
    cfg.horizon = 500;
    cfg.record_trajectories = false;
    return cfg;
}

void BM_RelativeErrorSerial(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(kernels::max_relative_error_serial(poly(), points()));
    s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(points().size()));
}
void BM_RelativeErrorParallel(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(kernels::max_relative_error_parallel(poly(), points()));
    s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(points().size()));
}
void BM_SectorSerial(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(kernels::min_sector_product_serial(poly(), 0.1, points()));
}
void BM_SectorParallel(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(kernels::min_sector_product_parallel(poly(), 0.1, points()));
}

auto one_trial(const SimulationConfig& base) {
    return [base](int i) {
        SimulationConfig cfg = base;
        cfg.seed = trial_seed(1, i);
        return *run(cfg).empirical_gain;
    };
}
void BM_TrialsSerial(benchmark::State& s) {
    const auto cfg = trial_config();
    for (auto _ : s) benchmark::DoNotOptimize(kernels::run_trials_serial(8, one_trial(cfg)));
}
void BM_TrialsParallel(benchmark::State& s) {
    const auto cfg = trial_config();
    for (auto _ : s) benchmark::DoNotOptimize(kernels::run_trials_parallel(8, one_trial(cfg)));
}

}  // namespace

BENCHMARK(BM_RelativeErrorSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RelativeErrorParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SectorSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SectorParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
