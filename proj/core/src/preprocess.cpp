#include "tabimpute/preprocess.hpp"
#include "tabimpute/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace tabimpute {

namespace {

constexpr std::array<std::string_view, 10> kMissingTokens = {
    "NaN", "NAN", "Nan", "nan", "NA", "#NA", "N/A", "NA#", "#VALUE!", "#DIV/0!",
};

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double observed_mean(const Matrix& m, Index j) {
    double sum = 0.0;
    Index count = 0;
    for (Index i = 0; i < m.rows(); ++i) {
        if (!is_missing(m(i, j))) {
            sum += m(i, j);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

// Most frequent observed value; ties go to the smallest value.
double observed_mode(const Matrix& m, Index j) {
    std::map<double, std::size_t> counts;
    for (Index i = 0; i < m.rows(); ++i)
        if (!is_missing(m(i, j))) ++counts[m(i, j)];
    double best = 0.0;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

void require_observed(const Matrix& m, Index j) {
    for (Index i = 0; i < m.rows(); ++i)
        if (!is_missing(m(i, j))) return;
    throw DataError(fmt::format("column {} has no observed values to impute from", j));
}

} // namespace

void PreImputeStrategy::validate(std::size_t n_rows) const {
    if (!uses_knn()) return;
    if (k < 1 || static_cast<std::size_t>(k) >= n_rows)
        throw ValidationError("knn_k", fmt::format("knn_k must be at least 1 and below the row count {} (got {})",
                                                   n_rows, k));
}

std::string_view to_string(PreImputeStrategy::Kind kind) {
    switch (kind) {
    case PreImputeStrategy::Kind::ColumnMean: return "ColumnMean";
    case PreImputeStrategy::Kind::Knn: return "KNNImputer";
    case PreImputeStrategy::Kind::MixType: return "MixType";
    }
    return "unknown";
}

std::optional<PreImputeStrategy::Kind> parse_strategy_kind(std::string_view name) {
    const auto n = lower(trim(name));
    if (n == "columnmean" || n == "mean") return PreImputeStrategy::Kind::ColumnMean;
    if (n == "knn" || n == "knnimputer") return PreImputeStrategy::Kind::Knn;
    if (n == "mixtype" || n == "mix") return PreImputeStrategy::Kind::MixType;
    return std::nullopt;
}

std::vector<std::string> PreprocessedTriple::matrix_column_names() const {
    std::vector<std::string> names;
    names.reserve(imputable.size());
    for (auto c : imputable) names.push_back(clean.column_names()[c]);
    return names;
}

std::span<const std::string_view> missing_tokens() { return kMissingTokens; }

Table normalize_missing_tokens(Table table) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            const Cell& cell = table.at(r, c);
            if (!cell.is_text()) continue;
            const auto t = trim(cell.as_text());
            if (std::find(kMissingTokens.begin(), kMissingTokens.end(), t) != kMissingTokens.end())
                table.set(r, c, Cell::missing());
        }
    }
    return table;
}

Table zeros_to_missing(Table table) {
    for (std::size_t r = 0; r < table.rows(); ++r)
        for (std::size_t c = 0; c < table.cols(); ++c)
            if (table.at(r, c).is_number() && table.at(r, c).as_number() == 0.0) table.set(r, c, Cell::missing());
    return table;
}

std::pair<Table, std::vector<ColumnProfile>> classify_columns(Table table) {
    std::vector<ColumnProfile> profiles;
    profiles.reserve(table.cols());
    for (std::size_t c = 0; c < table.cols(); ++c) {
        auto column = table.column(c);
        const auto initial = profile_column(column);
        if (initial.kind == ColumnKind::Excluded) {
            profiles.push_back(initial);
            continue;
        }
        for (auto& cell : column) {
            if (initial.kind == ColumnKind::Continuous ? cell.is_text() : cell.is_number()) cell = Cell::missing();
        }
        table.set_column(c, column);
        // Profiling the coerced column keeps the kind and makes the
        // operation idempotent.
        profiles.push_back(profile_column(column));
    }
    return {std::move(table), std::move(profiles)};
}

Matrix pre_impute(const Matrix& encoded, std::span<const ColumnProfile> profiles, const PreImputeStrategy& strategy,
                  std::vector<std::string>* warnings) {
    if (static_cast<Index>(profiles.size()) != encoded.cols())
        throw DataError(fmt::format("pre_impute: {} profiles for {} columns", profiles.size(), encoded.cols()));

    std::vector<bool> has_missing(static_cast<std::size_t>(encoded.cols()), false);
    for (Index j = 0; j < encoded.cols(); ++j) {
        has_missing[static_cast<std::size_t>(j)] = encoded.col(j).array().isNaN().any();
        if (has_missing[static_cast<std::size_t>(j)]) require_observed(encoded, j);
    }

    using Kind = PreImputeStrategy::Kind;
    if (strategy.kind == Kind::Knn) return knn_impute(encoded, strategy.k, warnings);

    Matrix out = encoded;
    std::vector<bool> knn_columns(static_cast<std::size_t>(encoded.cols()), false);
    for (Index j = 0; j < encoded.cols(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (!has_missing[ju]) continue;
        const bool categorical = profiles[ju].categorical();
        if (categorical && strategy.kind == Kind::MixType) {
            knn_columns[ju] = true;
            continue;
        }
        const double fill = categorical ? observed_mode(encoded, j) : observed_mean(encoded, j);
        for (Index i = 0; i < out.rows(); ++i)
            if (is_missing(out(i, j))) out(i, j) = fill;
    }
    if (std::find(knn_columns.begin(), knn_columns.end(), true) != knn_columns.end()) {
        // Distances use the original missingness pattern, not the mean fills.
        const Matrix knn = knn_impute_columns(encoded, strategy.k, knn_columns, warnings);
        for (Index j = 0; j < out.cols(); ++j)
            if (knn_columns[static_cast<std::size_t>(j)]) out.col(j) = knn.col(j);
    }
    return out;
}

PreprocessedTriple preprocessing_df(const Table& table, bool impute_zeros, const PreImputeStrategy& strategy) {
    strategy.validate(table.rows());

    Table normalized = normalize_missing_tokens(table);
    if (impute_zeros) normalized = zeros_to_missing(std::move(normalized));
    auto [clean, profiles] = classify_columns(std::move(normalized));

    PreprocessedTriple out;
    for (std::size_t c = 0; c < profiles.size(); ++c)
        if (profiles[c].imputable()) out.imputable.push_back(c);
    if (out.imputable.empty())
        throw DataError("nothing to impute: every column is excluded by the type rule");

    const auto n = static_cast<Index>(clean.rows());
    out.encoded.resize(n, static_cast<Index>(out.imputable.size()));
    out.maps.resize(clean.cols());
    std::vector<ColumnProfile> matrix_profiles;
    for (std::size_t j = 0; j < out.imputable.size(); ++j) {
        const std::size_t c = out.imputable[j];
        const auto& profile = profiles[c];
        matrix_profiles.push_back(profile);
        auto column = clean.column(c);
        if (profile.categorical()) {
            auto [codes, map] = encode_labels(column, profile);
            column = std::move(codes);
            out.maps[c] = std::move(map);
        }
        bool any_observed = false;
        for (Index i = 0; i < n; ++i) {
            const Cell& cell = column[static_cast<std::size_t>(i)];
            out.encoded(i, static_cast<Index>(j)) = cell.is_number() ? cell.as_number() : kMissing;
            any_observed = any_observed || cell.is_number();
        }
        if (!any_observed)
            throw DataError(fmt::format("column '{}' has no observed values to impute from", clean.column_names()[c]));
    }

    out.preimputed = pre_impute(out.encoded, matrix_profiles, strategy, &out.warnings);
    out.clean = std::move(clean);
    out.profiles = std::move(profiles);
    return out;
}

Table reassemble(const PreprocessedTriple& triple, const Matrix& filled) {
    if (filled.rows() != triple.encoded.rows() || filled.cols() != triple.encoded.cols())
        throw DataError("reassemble: matrix shape does not match the encoded matrix");
    Table out = triple.clean;
    for (std::size_t j = 0; j < triple.imputable.size(); ++j) {
        const std::size_t c = triple.imputable[j];
        const auto& map = triple.maps[c];
        const auto jj = static_cast<Index>(j);
        for (Index i = 0; i < filled.rows(); ++i) {
            if (!is_missing(triple.encoded(i, jj))) continue;
            const auto r = static_cast<std::size_t>(i);
            out.set(r, c, map ? decode_label(filled(i, jj), *map) : Cell::number(filled(i, jj)));
        }
    }
    return out;
}

Table matrix_table(const Matrix& m, const Table& like, std::span<const std::string> column_names) {
    if (static_cast<std::size_t>(m.rows()) != like.rows() || static_cast<std::size_t>(m.cols()) != column_names.size())
        throw DataError("matrix_table: shape mismatch");
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) cells.push_back(Cell::number(m(i, j)));
    return Table(like.id_header(), like.row_ids(),
                 std::vector<std::string>(column_names.begin(), column_names.end()), std::move(cells));
}

} // namespace tabimpute
