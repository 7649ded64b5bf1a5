// Microbenchmarks for the hot statistical kernels: the bootstrap loops
// dominate screening cost, so spearman and the per-resample draw are the
// numbers to watch.

#include <benchmark/benchmark.h>

#include <vector>

#include "tabgap/gaps.hpp"
#include "tabgap/metafeatures.hpp"
#include "tabgap/rng.hpp"
#include "tabgap/routing.hpp"
#include "tabgap/screening.hpp"
#include "tabgap/stats.hpp"

using namespace tabgap;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

void bm_spearman(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = gaussian(n, 1);
    const auto y = gaussian(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spearman(x, y));
    }
}

void bm_spearman_pvalue(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(spearman_pvalue(0.43, 50));
    }
}

void bm_bh_adjust(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    std::vector<double> p(n);
    for (auto& v : p) v = rng.uniform01();
    for (auto _ : state) {
        benchmark::DoNotOptimize(bh_adjust(p));
    }
}

void bm_bootstrap_sign_consistency(benchmark::State& state) {
    const auto x = gaussian(50, 4);
    auto y = gaussian(50, 5);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.8 * x[i];
    const double rho = spearman(x, y);
    BootstrapConfig cfg;
    cfg.n_resamples = static_cast<int>(state.range(0));
    cfg.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bootstrap_sign_consistency(x, y, rho, cfg, 99));
    }
}

void bm_normalize_split(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<MethodRun> pool(n);
    for (std::size_t i = 0; i < n; ++i) {
        pool[i].dataset_id = "d";
        pool[i].method_id = "m" + std::to_string(i);
        pool[i].val_error = rng.uniform01();
        pool[i].test_error = rng.uniform01();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize_split(pool, 1e-5));
    }
}

void bm_attr_entropy(benchmark::State& state) {
    RawColumn col;
    col.name = "x";
    col.kind = ColumnKind::numeric;
    col.numeric = gaussian(static_cast<std::size_t>(state.range(0)), 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attr_entropy(col));
    }
}

void bm_knn_predict(benchmark::State& state) {
    const auto n_train = static_cast<std::size_t>(state.range(0));
    const std::size_t n_cols = 40;
    Rng rng(9);
    FoldData fold;
    for (std::size_t i = 0; i < n_train; ++i) {
        std::vector<double> row(n_cols);
        for (auto& v : row) v = rng.normal();
        fold.train_rows.push_back(std::move(row));
        fold.train_gaps.push_back(rng.normal());
    }
    fold.test_row.resize(n_cols);
    for (auto& v : fold.test_row) v = rng.normal();
    PredictorSpec knn;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_predict(knn, fold, {}));
    }
}

}  // namespace

BENCHMARK(bm_spearman)->Arg(50)->Arg(200)->Arg(1000);
BENCHMARK(bm_spearman_pvalue);
BENCHMARK(bm_bh_adjust)->Arg(200)->Arg(1000);
BENCHMARK(bm_bootstrap_sign_consistency)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_normalize_split)->Arg(20)->Arg(60);
BENCHMARK(bm_attr_entropy)->Arg(1000)->Arg(10000);
BENCHMARK(bm_knn_predict)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
