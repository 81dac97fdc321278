#include "tabimpute/bench.hpp"
#include "tabimpute/density.hpp"
#include "tabimpute/errors.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

using namespace tabimpute;
namespace fs = std::filesystem;

namespace {

const fs::path kData = TABIMPUTE_TEST_DATA_DIR;

const Table& fixture() {
    static const Table t = read_csv(kData / "mixed.csv");
    return t;
}

std::size_t eligible_count(const Table& t, MaskScope scope) {
    const auto profiles = classify_columns(normalize_missing_tokens(t)).second;
    std::size_t n = 0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) {
            const auto& p = profiles[c];
            const Cell& cell = t.at(r, c);
            const bool scoped = scope == MaskScope::AllImputable     ? p.imputable()
                                : scope == MaskScope::ContinuousOnly ? p.kind == ColumnKind::Continuous
                                                                     : p.categorical();
            if (!scoped) continue;
            if ((p.kind == ColumnKind::Continuous && cell.is_number()) || (p.categorical() && cell.is_text())) ++n;
        }
    return n;
}

Table numbers(std::initializer_list<double> col) {
    std::vector<std::string> ids;
    std::vector<Cell> cells;
    for (double v : col) {
        ids.push_back("r" + std::to_string(ids.size()));
        cells.push_back(Cell::number(v));
    }
    return Table("id", ids, {"x"}, cells);
}

} // namespace

TEST(MaskRandom, HidesExactlyFloorOfEligible) {
    for (auto scope : {MaskScope::AllImputable, MaskScope::ContinuousOnly, MaskScope::CategoricalOnly}) {
        const std::size_t eligible = eligible_count(fixture(), scope);
        for (double f : {0.1, 0.2, 0.3, 0.4}) {
            const auto m = mask_random(fixture(), {f, 5, scope});
            EXPECT_EQ(m.truth.size(), static_cast<std::size_t>(std::floor(f * eligible + 1e-9)));
        }
    }
}

TEST(MaskRandom, OnlyObservedInScopeCellsAreHidden) {
    const auto profiles = classify_columns(normalize_missing_tokens(fixture())).second;
    const auto m = mask_random(fixture(), {0.3, 11, MaskScope::ContinuousOnly});
    std::set<std::pair<std::size_t, std::size_t>> hidden;
    for (const auto& t : m.truth) {
        EXPECT_EQ(profiles[t.col].kind, ColumnKind::Continuous);
        EXPECT_TRUE(t.original.is_number());
        EXPECT_EQ(fixture().at(t.row, t.col), t.original);
        EXPECT_TRUE(m.masked.at(t.row, t.col).is_missing());
        EXPECT_TRUE(hidden.emplace(t.row, t.col).second);
    }
    for (std::size_t r = 0; r < fixture().rows(); ++r)
        for (std::size_t c = 0; c < fixture().cols(); ++c)
            if (!hidden.count({r, c})) EXPECT_EQ(m.masked.at(r, c), fixture().at(r, c));
}

TEST(MaskRandom, DeterministicPerSeed) {
    const auto a = mask_random(fixture(), {0.2, 3});
    const auto b = mask_random(fixture(), {0.2, 3});
    const auto c = mask_random(fixture(), {0.2, 4});
    EXPECT_EQ(a.masked, b.masked);
    EXPECT_NE(a.masked, c.masked);
}

TEST(MaskRandom, NeverEmptiesAColumn) {
    const Table t = numbers({1, 2});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = mask_random(t, {0.5, seed});
        ASSERT_EQ(m.truth.size(), 1u);
    }
    const Table tiny = parse_csv("id,a,b\nr1,1,x\nr2,,y\nr3,3,\n");
    EXPECT_EQ(mask_random(tiny, {0.5, 1}).truth.size(), 2u);
    // floor(0.99 * 4) = 3 would need to empty a column.
    EXPECT_THROW(mask_random(tiny, {0.99, 1}), DataError);
}

TEST(MaskRandom, RejectsBadFractionAndEmptyScope) {
    EXPECT_THROW(mask_random(fixture(), {0.0}), ValidationError);
    EXPECT_THROW(mask_random(fixture(), {1.0}), ValidationError);
    EXPECT_THROW(mask_random(numbers({1, 2, 3}), {0.5, 0, MaskScope::CategoricalOnly}), DataError);
}

TEST(Unmask, RestoresOriginal) {
    for (double f : {0.1, 0.4}) {
        const auto m = mask_random(fixture(), {f, 9});
        EXPECT_EQ(unmask(m.masked, m.truth), fixture());
    }
}

TEST(Metrics, RmseExamples) {
    const Table truth_table = numbers({1, 2, 3});
    std::vector<MaskedCell> truth{{0, 0, Cell::number(1)}, {1, 0, Cell::number(2)}};
    EXPECT_EQ(rmse(truth_table, truth), 0.0);
    const Table off = numbers({1, 4, 3});
    EXPECT_DOUBLE_EQ(rmse(off, truth), std::sqrt(2.0));
    EXPECT_THROW(rmse(off, std::vector<MaskedCell>{}), DataError);
}

TEST(Metrics, RmseMatchesLoopOracle) {
    Rng rng(2);
    std::vector<std::string> ids;
    std::vector<Cell> cells;
    std::vector<double> got, want;
    std::vector<MaskedCell> truth;
    for (std::size_t i = 0; i < 200; ++i) {
        ids.push_back("r" + std::to_string(i));
        const double g = rng.normal() * 10, w = rng.normal() * 10;
        cells.push_back(Cell::number(g));
        got.push_back(g);
        want.push_back(w);
        truth.push_back({i, 0, Cell::number(w)});
    }
    const Table t("id", ids, {"x"}, cells);
    EXPECT_NEAR(rmse(t, truth), oracle::rmse_loop(got, want), 1e-12);
}

TEST(Metrics, AccuracyExamples) {
    const Table t = parse_csv("id,c\nr1,a\nr2,b\nr3,a\nr4,b\n");
    std::vector<MaskedCell> same{{0, 0, Cell::text("a")}, {1, 0, Cell::text("b")}};
    EXPECT_EQ(categorical_accuracy(t, same), 1.0);
    std::vector<MaskedCell> wrong{{0, 0, Cell::text("b")}, {1, 0, Cell::text("a")}};
    EXPECT_EQ(categorical_accuracy(t, wrong), 0.0);
    std::vector<MaskedCell> mixed{{0, 0, Cell::text("a")}, {1, 0, Cell::text("b")}, {2, 0, Cell::text("a")},
                                  {3, 0, Cell::text("a")}};
    EXPECT_EQ(categorical_accuracy(t, mixed), 0.75);
    EXPECT_THROW(categorical_accuracy(t, std::vector<MaskedCell>{{0, 0, Cell::number(1)}}), DataError);
}

TEST(BenchMethod, ParseNames) {
    EXPECT_EQ(parse_bench_method("mean")->kind, BenchMethod::Kind::Mean);
    EXPECT_EQ(parse_bench_method("ENGINE")->kind, BenchMethod::Kind::Engine);
    EXPECT_EQ(parse_bench_method("knn")->k, 5);
    EXPECT_EQ(parse_bench_method("knn:7")->k, 7);
    EXPECT_EQ(parse_bench_method("knn:7")->name(), "knn:7");
    for (const char* bad : {"knn:0", "knn:", "knn:x", "median", ""}) EXPECT_FALSE(parse_bench_method(bad)) << bad;
    EXPECT_EQ(parse_mask_scope("Continuous"), MaskScope::ContinuousOnly);
    EXPECT_FALSE(parse_mask_scope("numeric"));
}

TEST(BaselineImpute, MeanAndMode) {
    const Table t = parse_csv("id,x,c\nr1,1,a\nr2,,b\nr3,5,b\nr4,3,\n");
    const Table out = baseline_impute(t, BenchMethod::mean());
    EXPECT_EQ(out.at(1, 0), Cell::number(3.0));
    EXPECT_EQ(out.at(3, 1), Cell::text("b"));
    EXPECT_EQ(out.at(0, 0), Cell::number(1.0));
    EXPECT_THROW(baseline_impute(t, BenchMethod::engine()), DataError);
}

TEST(BaselineImpute, KnnMatchesOracle) {
    const Table t = parse_csv("id,x,y\nr1,1,10\nr2,2,20\nr3,10,100\nr4,1.5,\n");
    const Table out = baseline_impute(t, BenchMethod::knn(2));
    EXPECT_DOUBLE_EQ(out.at(3, 1).as_number(), 15.0);
}

TEST(RunBenchmark, OneRowPerMethodAndFraction) {
    const std::vector<double> fractions{0.1, 0.2, 0.3, 0.4};
    const std::vector<BenchMethod> methods{BenchMethod::mean(), BenchMethod::knn(3), BenchMethod::engine()};
    const auto report = run_benchmark(fixture(), fractions, methods, ImputeConfig{}, 1);
    ASSERT_EQ(report.rows.size(), 12u);
    for (const auto& m : methods) {
        const auto n = std::count_if(report.rows.begin(), report.rows.end(),
                                     [&](const BenchRow& r) { return r.method == m.name(); });
        EXPECT_EQ(n, 4);
    }
    for (const auto& r : report.rows) {
        EXPECT_TRUE(r.error.empty()) << r.error;
        ASSERT_TRUE(r.rmse && r.categorical_accuracy);
        EXPECT_DOUBLE_EQ(*r.mse, *r.rmse * *r.rmse);
        EXPECT_GE(*r.categorical_accuracy, 0.0);
        EXPECT_LE(*r.categorical_accuracy, 1.0);
        EXPECT_GE(r.wall_time_ms, 0.0);
    }
    EXPECT_FALSE(report.densities.empty());
}

TEST(RunBenchmark, MeanOnlyHasNoEngineRows) {
    const std::vector<double> fractions{0.2};
    const std::vector<BenchMethod> methods{BenchMethod::mean()};
    const auto report = run_benchmark(fixture(), fractions, methods, ImputeConfig{}, 1);
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_EQ(report.rows[0].method, "mean");
}

TEST(RunBenchmark, DeterministicApartFromTiming) {
    const std::vector<double> fractions{0.2, 0.3};
    const std::vector<BenchMethod> methods{BenchMethod::mean(), BenchMethod::engine()};
    const auto a = run_benchmark(fixture(), fractions, methods, ImputeConfig{}, 5);
    const auto b = run_benchmark(fixture(), fractions, methods, ImputeConfig{}, 5);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].rmse, b.rows[i].rmse);
        EXPECT_EQ(a.rows[i].categorical_accuracy, b.rows[i].categorical_accuracy);
        EXPECT_EQ(a.rows[i].n_masked, b.rows[i].n_masked);
    }
}

TEST(RunBenchmark, FailingCellIsRecorded) {
    const std::vector<double> fractions{0.5};
    const std::vector<BenchMethod> methods{BenchMethod::knn(50)};
    const auto report = run_benchmark(numbers({1, 2, 3, 4}), fractions, methods, ImputeConfig{}, 1);
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_FALSE(report.rows[0].error.empty());
}

TEST(RunBenchmark, RejectsBadArguments) {
    const std::vector<BenchMethod> methods{BenchMethod::mean()};
    const std::vector<double> bad{0.0};
    EXPECT_THROW(run_benchmark(fixture(), bad, methods, ImputeConfig{}, 1), ValidationError);
    const std::vector<double> ok{0.1};
    BenchOptions opt;
    opt.repetitions = 0;
    EXPECT_THROW(run_benchmark(fixture(), ok, methods, ImputeConfig{}, 1, opt), ValidationError);
}

TEST(BenchOutputs, CsvJsonAndFiles) {
    BenchReport report;
    BenchRow row;
    row.method = "mean";
    row.fraction = 0.1;
    row.n_masked = 4;
    row.rmse = 2.0;
    row.mse = 4.0;
    row.wall_time_ms = 1.5;
    report.rows.push_back(row);
    BenchRow failed;
    failed.method = "knn:5";
    failed.fraction = 0.2;
    failed.error = "boom \"x\"";
    report.rows.push_back(failed);

    std::ostringstream csv;
    write_bench_csv(csv, report);
    EXPECT_EQ(csv.str(), "method,fraction,metric,value\n"
                         "mean,0.1,rmse,2\nmean,0.1,mse,4\nmean,0.1,wall_time_ms,1.5\nmean,0.1,n_masked,4\n"
                         "knn:5,0.2,error,\"boom 'x'\"\n");
    const std::string json = bench_json(report);
    EXPECT_NE(json.find("\"categorical_accuracy\": null"), std::string::npos);
    EXPECT_NE(json.find("\"error\": \"boom \\\"x\\\"\""), std::string::npos);

    const std::vector<double> ref{1, 2, 3}, cand{1, 2, 2.5};
    report.densities.push_back({"mean", 0.1, "age", density_curve(ref, cand)});
    const auto dir = fs::temp_directory_path() / "tabimpute_bench_outputs";
    fs::remove_all(dir);
    write_bench_outputs(dir, report, true);
    for (const char* f : {"bench.csv", "bench.json", "densities.csv", "density_age_mean_0.1.svg"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    fs::remove_all(dir);
}

TEST(Density, SilvermanBandwidth) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    // sd = sqrt(2.5), IQR = 2 so IQR / 1.34 is smaller.
    EXPECT_NEAR(silverman_bandwidth(v), 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2), 1e-12);
    const std::vector<double> flat{3, 3, 3};
    EXPECT_EQ(silverman_bandwidth(flat), 1.0);
}

TEST(Density, KdeIntegratesToOne) {
    Rng rng(4);
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back(rng.normal());
    const auto curve = density_curve(v, v, 512);
    const double dx = curve.abscissae[1] - curve.abscissae[0];
    double area = 0.0;
    for (double d : curve.reference) area += d * dx;
    EXPECT_NEAR(area, 1.0, 1e-2);
    EXPECT_EQ(curve.reference, curve.candidate);
    const std::vector<double> one{0.0};
    const std::vector<double> at{0.0};
    EXPECT_NEAR(gaussian_kde(one, at, 1.0)[0], 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(Density, SvgIsStandalone) {
    const std::vector<double> a{1, 2, 3};
    const std::string svg = render_density_svg(density_curve(a, a), "t", "original", "imputed");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
