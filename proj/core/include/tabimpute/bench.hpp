#pragma once

#include "tabimpute/density.hpp"
#include "tabimpute/engine.hpp"
#include "tabimpute/table.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tabimpute {

enum class MaskScope { AllImputable, ContinuousOnly, CategoricalOnly };

std::string_view to_string(MaskScope scope);
std::optional<MaskScope> parse_mask_scope(std::string_view name);

struct MaskSpec {
    double fraction = 0.1; // strictly inside (0, 1)
    std::uint64_t seed = 0;
    MaskScope scope = MaskScope::AllImputable;
};

struct MaskedCell {
    std::size_t row = 0;
    std::size_t col = 0;
    Cell original;
};

struct MaskResult {
    Table masked;
    std::vector<MaskedCell> truth;
};

/// Hides floor(fraction * eligible) observed cells chosen uniformly without
/// replacement. Eligible cells are the observed Number cells of Continuous
/// columns and Text cells of Categorical/Boolean columns in scope. A draw
/// that would leave its column without an observed cell is rejected and
/// the next candidate drawn.
MaskResult mask_random(const Table& table, const MaskSpec& spec);

/// Puts the ground truth back.
Table unmask(Table masked, std::span<const MaskedCell> truth);

/// Root mean squared error over the numeric entries of `truth`.
double rmse(const Table& imputed, std::span<const MaskedCell> truth);

/// Share of the text entries of `truth` recovered exactly.
double categorical_accuracy(const Table& imputed, std::span<const MaskedCell> truth);

struct BenchMethod {
    enum class Kind { Mean, Knn, Engine };

    Kind kind = Kind::Engine;
    int k = 5;

    static BenchMethod mean() { return {Kind::Mean, 5}; }
    static BenchMethod knn(int k = 5) { return {Kind::Knn, k}; }
    static BenchMethod engine() { return {Kind::Engine, 5}; }

    std::string name() const;
};

/// Accepts "mean", "knn", "knn:<k>", "engine".
std::optional<BenchMethod> parse_bench_method(std::string_view name);

/// Stand-alone pre-imputation (column mean/mode or KNN) decoded back into
/// the cleaned table. `method` must not be Engine.
Table baseline_impute(const Table& table, const BenchMethod& method);

struct BenchRow {
    std::string method;
    double fraction = 0.0;
    std::size_t n_masked = 0;
    std::optional<double> rmse;
    std::optional<double> mse;
    std::optional<double> categorical_accuracy;
    double wall_time_ms = 0.0; // median over repetitions
    std::string error;         // non-empty when the cell failed
};

struct BenchDensity {
    std::string method;
    double fraction = 0.0;
    std::string column;
    DensityCurve curve; // reference = original values, candidate = after imputation
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchDensity> densities;
};

struct BenchOptions {
    MaskScope scope = MaskScope::AllImputable;
    int repetitions = 1;
    bool densities = true;
};

/// For every fraction: one mask, then every method is run, timed and
/// scored on it. A failing cell is recorded and the run continues.
BenchReport run_benchmark(const Table& table, std::span<const double> fractions,
                          std::span<const BenchMethod> methods, const ImputeConfig& config, std::uint64_t seed,
                          const BenchOptions& options = {});

/// Long format: method,fraction,metric,value.
void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string bench_json(const BenchReport& report);
/// method,fraction,column,abscissa,density_original,density_imputed.
void write_density_csv(std::ostream& out, const BenchReport& report);

/// bench.csv, bench.json, densities.csv and, with `plots`, one SVG per
/// density curve.
void write_bench_outputs(const std::filesystem::path& dir, const BenchReport& report, bool plots);

} // namespace tabimpute
