#include "tabimpute/boosting.hpp"
#include "tabimpute/engine.hpp"
#include "tabimpute/factorize.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/random.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

using namespace tabimpute;

namespace {

Matrix uniform(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    return m;
}

Table correlated_table(Index rows, Index cols, Index holed, double frac, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> ids, names;
    for (Index i = 0; i < rows; ++i) ids.push_back("r" + std::to_string(i));
    for (Index j = 0; j < cols; ++j) names.push_back("c" + std::to_string(j));
    std::vector<Cell> cells;
    for (Index i = 0; i < rows; ++i) {
        const double a = rng.normal(), b = rng.normal();
        for (Index j = 0; j < cols; ++j) {
            const double v = std::sin(1.0 + j) * a + std::cos(2.0 + j) * b + 0.2 * rng.normal();
            cells.push_back(j < holed && rng.uniform() < frac ? Cell::missing() : Cell::number(v));
        }
    }
    return Table("id", ids, names, cells);
}

void BM_Nmf(benchmark::State& state) {
    const Matrix X = uniform(state.range(0), 20, 1);
    NmfOptions opt;
    opt.max_iter = 200;
    opt.tol = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(nmf(X, 5, opt));
}
BENCHMARK(BM_Nmf)->Arg(50)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_TruncatedSvd(benchmark::State& state) {
    const Matrix X = uniform(state.range(0), 50, 2);
    for (auto _ : state) benchmark::DoNotOptimize(truncated_svd(X, 10, 0));
}
BENCHMARK(BM_TruncatedSvd)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_FitRegressor(benchmark::State& state) {
    const Index rows = state.range(0);
    const Matrix X = uniform(rows, state.range(1), 3);
    std::vector<double> y(static_cast<std::size_t>(rows));
    for (Index i = 0; i < rows; ++i) y[static_cast<std::size_t>(i)] = std::sin(6.0 * X(i, 0)) + X(i, 1);
    const auto params = default_params(Task::regression(), static_cast<std::size_t>(rows), static_cast<std::size_t>(X.cols()));
    for (auto _ : state) benchmark::DoNotOptimize(fit_regressor(X, y, params, 0));
}
BENCHMARK(BM_FitRegressor)->Args({200, 20})->Args({2000, 20})->Args({2000, 50})->Unit(benchmark::kMillisecond);

void BM_KnnImpute(benchmark::State& state) {
    Matrix m = uniform(state.range(0), 10, 4);
    Rng rng(5);
    for (Index i = 0; i < m.size(); ++i)
        if (rng.uniform() < 0.15) m.data()[i] = kMissing;
    for (auto _ : state) benchmark::DoNotOptimize(knn_impute(m, 5));
}
BENCHMARK(BM_KnnImpute)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_XputeByMissingColumns(benchmark::State& state) {
    const Table t = correlated_table(1000, 25, state.range(0), 0.2, 6);
    for (auto _ : state) benchmark::DoNotOptimize(xpute(t, ImputeConfig{}));
}
BENCHMARK(BM_XputeByMissingColumns)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kSecond)->Iterations(1);

} // namespace
BENCHMARK_MAIN();
