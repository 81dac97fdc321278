#pragma once

#include "tabimpute/boosting.hpp"
#include "tabimpute/factorize.hpp"
#include "tabimpute/matrix.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/table.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabimpute {

inline constexpr int kMinEnsembleSize = 3;
inline constexpr int kMaxEnsembleSize = 9;
inline constexpr int kMinIterations = 1;
inline constexpr int kMaxIterations = 9;

/// Full run configuration. Field names are the keys accepted by config
/// files; `validate()` rejects out-of-range values with a ValidationError
/// naming the field.
struct ImputeConfig {
    bool impute_zeros = false;
    PreImputeStrategy pre_imputation = PreImputeStrategy::mix_type();
    int ensemble_size = 3;          // [3, 9]
    bool mf_nan_replace = false;    // design = preimputed with factorization at missing cells
    bool use_full_transform = false; // design = full factorization reconstruction
    bool search_enabled = false;
    int search_trials = 5;          // [5, 50]
    int n_iterations = 1;           // [1, 9]
    bool export_intermediates = false;
    bool save_result = false;
    bool save_plots = false;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir; // target for exports, saved results and plots

    void validate() const;

    friend bool operator==(const ImputeConfig&, const ImputeConfig&) = default;
};

/// Search runs only with more than 50 samples, at least 4 samples per
/// feature, and at most 100 columns needing imputation.
bool gate_search(std::size_t n_samples, std::size_t n_features, std::size_t n_missing_columns);

/// Seed of ensemble member `member` for table column `column`.
std::uint64_t member_seed(std::uint64_t seed, std::size_t column, int member);

struct ColumnPlan {
    std::size_t column = 0;     // table column
    Index matrix_column = 0;    // column in the encoded/design matrices
    ColumnKind kind = ColumnKind::Continuous;
    Task task;
    std::vector<Index> missing_rows; // ascending
    std::optional<BoostParams> cached_params;
};

struct ColumnReport {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    Task task;
    std::size_t n_missing = 0;
    std::optional<BoostParams> params;
    bool searched = false;
    std::size_t models_trained = 0;
    double time_ms = 0.0;
};

struct RunReport {
    std::vector<ColumnReport> columns;
    std::vector<double> iteration_deltas; // one per pass
    std::vector<std::string> warnings;
    std::optional<FactorizationMethod> factorization;
    int factorization_rank = 0;
    bool search_gate = false;
    std::size_t models_trained = 0;
    std::size_t searches_run = 0;
    double preprocess_ms = 0.0;
    double factorize_ms = 0.0;
    std::vector<double> pass_ms;
    double total_ms = 0.0;
};

/// Report as a JSON document.
std::string to_json(const RunReport& report);

using LogFn = std::function<void(std::string_view)>;

/// Called with the plan and the full feature matrix (design minus the
/// target column) right before a column's models are trained.
using ColumnObserver = std::function<void(const ColumnPlan&, const Matrix&)>;

struct ImputeState {
    PreprocessedTriple data; // data.encoded keeps the original missingness
    Table clean;             // cleaned table, imputed cells filled in as they are predicted
    Matrix encoded;          // encoded matrix, missing positions filled progressively
    Matrix design;           // dense learner input
    std::vector<ColumnPlan> plans;
    bool search_gate = false;
    /// When false, predictions are held back and applied at the end of the
    /// pass instead of being visible to later columns of the same pass.
    bool sequential_updates = true;
    ColumnObserver observer;
    LogFn log;
    RunReport report;
};

/// Preprocessing, optional factorization, column plans and search gate.
ImputeState initialize(const Table& table, const ImputeConfig& config);

/// Trains the column's ensemble and writes its predictions into the state.
/// Returns the predicted encoded values for `plan.missing_rows`.
std::vector<double> impute_column(ColumnPlan& plan, ImputeState& state, const ImputeConfig& config);

/// One sweep over every planned column in ascending column order.
void run_pass(ImputeState& state, const ImputeConfig& config, int pass_index);

/// Mean absolute difference over the positions flagged in `missing`.
double iteration_delta(const Matrix& previous, const Matrix& current, const Mask& missing);

struct ImputeResult {
    Table imputed;
    RunReport report;
};

/// Complete pipeline; Excluded columns are carried through verbatim.
ImputeResult xpute(const Table& table, const ImputeConfig& config, const LogFn& log = {});

} // namespace tabimpute
