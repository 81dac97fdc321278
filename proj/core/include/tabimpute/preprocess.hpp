#pragma once

#include "tabimpute/matrix.hpp"
#include "tabimpute/table.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabimpute {

/// First-fill strategy that makes the encoded matrix dense.
struct PreImputeStrategy {
    enum class Kind { ColumnMean, Knn, MixType };

    Kind kind = Kind::MixType;
    int k = 5; // neighbours for Knn / MixType

    static PreImputeStrategy column_mean() { return {Kind::ColumnMean, 5}; }
    static PreImputeStrategy knn(int k = 5) { return {Kind::Knn, k}; }
    static PreImputeStrategy mix_type(int k = 5) { return {Kind::MixType, k}; }

    bool uses_knn() const noexcept { return kind != Kind::ColumnMean; }

    /// Throws ValidationError unless 1 <= k < n_rows (only checked for
    /// strategies that use neighbours).
    void validate(std::size_t n_rows) const;

    friend bool operator==(const PreImputeStrategy&, const PreImputeStrategy&) = default;
};

std::string_view to_string(PreImputeStrategy::Kind kind);
/// Accepts "ColumnMean", "KNN"/"KNNImputer", "MixType" (case-insensitive).
std::optional<PreImputeStrategy::Kind> parse_strategy_kind(std::string_view name);

/// Cleaned table, label-encoded matrix and its dense pre-imputed version.
struct PreprocessedTriple {
    Table clean;
    Matrix encoded;    // imputable columns only; NaN marks missing
    Matrix preimputed; // same shape as `encoded`, no NaN
    std::vector<ColumnProfile> profiles;      // one per table column
    std::vector<std::optional<LabelMap>> maps; // one per table column
    std::vector<std::size_t> imputable;       // table column of each matrix column
    std::vector<std::string> warnings;

    std::vector<std::string> matrix_column_names() const;
    const ColumnProfile& matrix_profile(Index j) const { return profiles[imputable[static_cast<std::size_t>(j)]]; }
};

/// Tokens that spreadsheet exports use for absent or broken values.
std::span<const std::string_view> missing_tokens();

/// Text cells equal (after trimming) to one of missing_tokens() become Missing.
Table normalize_missing_tokens(Table table);

/// Number cells exactly equal to zero become Missing.
Table zeros_to_missing(Table table);

/// Profiles every column and coerces the minority type to Missing in
/// Continuous and Categorical columns. Excluded columns are untouched.
std::pair<Table, std::vector<ColumnProfile>> classify_columns(Table table);

/// Fills every NaN in `encoded`. `profiles` holds one entry per matrix
/// column. Throws DataError naming the column index when a column to be
/// filled has no observed values.
Matrix pre_impute(const Matrix& encoded, std::span<const ColumnProfile> profiles,
                  const PreImputeStrategy& strategy, std::vector<std::string>* warnings = nullptr);

/// Missing-aware Euclidean distance between two rows:
/// sqrt(D / |S| * sum over S of (x - y)^2), S the columns observed in both.
/// Returns nullopt when S is empty.
std::optional<double> nan_euclidean(const Matrix& m, Index a, Index b);

/// Fills each NaN with the mean of its column over the k nearest rows that
/// observe that column (ties on distance go to the lower row index). A
/// missing entry with no eligible neighbour falls back to the column mean
/// and appends a warning.
Matrix knn_impute(const Matrix& m, int k, std::vector<std::string>* warnings = nullptr);

/// knn_impute restricted to the columns flagged in `columns`; other NaNs
/// are left in place.
Matrix knn_impute_columns(const Matrix& m, int k, const std::vector<bool>& columns,
                          std::vector<std::string>* warnings = nullptr);

/// normalize -> (zeros) -> classify -> label-encode -> pre-impute.
/// Throws DataError("nothing to impute") when every column is Excluded.
PreprocessedTriple preprocessing_df(const Table& table, bool impute_zeros, const PreImputeStrategy& strategy);

/// Writes matrix values back into the cleaned table at the positions that
/// are missing in `triple.encoded`; categorical codes are decoded.
Table reassemble(const PreprocessedTriple& triple, const Matrix& filled);

/// Matrix as a CSV table: row IDs from `like`, NaN written as empty.
Table matrix_table(const Matrix& m, const Table& like, std::span<const std::string> column_names);

} // namespace tabimpute
