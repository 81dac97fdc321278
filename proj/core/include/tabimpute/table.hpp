#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tabimpute {

/// One table entry: a finite number, a non-empty string, or missing.
class Cell {
public:
    Cell() = default;

    static Cell missing() { return Cell{}; }
    /// Non-finite values collapse to Missing.
    static Cell number(double v);
    /// The empty string collapses to Missing.
    static Cell text(std::string s);

    bool is_missing() const noexcept { return std::holds_alternative<std::monostate>(value_); }
    bool is_number() const noexcept { return std::holds_alternative<double>(value_); }
    bool is_text() const noexcept { return std::holds_alternative<std::string>(value_); }

    double as_number() const { return std::get<double>(value_); }
    const std::string& as_text() const { return std::get<std::string>(value_); }

    friend bool operator==(const Cell&, const Cell&) = default;

private:
    std::variant<std::monostate, double, std::string> value_;
};

std::ostream& operator<<(std::ostream& os, const Cell& cell);

/// Row-major grid of cells with sample IDs and a header.
class Table {
public:
    Table() = default;
    Table(std::string id_header, std::vector<std::string> row_ids,
          std::vector<std::string> column_names, std::vector<Cell> cells);

    std::size_t rows() const noexcept { return row_ids_.size(); }
    std::size_t cols() const noexcept { return column_names_.size(); }

    const Cell& at(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
    void set(std::size_t row, std::size_t col, Cell cell) { cells_[row * cols() + col] = std::move(cell); }

    std::vector<Cell> column(std::size_t col) const;
    void set_column(std::size_t col, std::span<const Cell> values);

    const std::string& id_header() const noexcept { return id_header_; }
    const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
    const std::vector<std::string>& column_names() const noexcept { return column_names_; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::string id_header_;
    std::vector<std::string> row_ids_;
    std::vector<std::string> column_names_;
    std::vector<Cell> cells_;
};

enum class ColumnKind { Continuous, Categorical, Boolean, Excluded };

std::string_view to_string(ColumnKind kind);

struct ColumnProfile {
    ColumnKind kind = ColumnKind::Excluded;
    double frac_numeric = 0.0; // over all cells, missing included
    double frac_text = 0.0;
    std::size_t n_missing = 0;
    std::vector<std::string> categories; // sorted; empty unless Categorical/Boolean

    bool imputable() const noexcept { return kind != ColumnKind::Excluded; }
    bool categorical() const noexcept {
        return kind == ColumnKind::Categorical || kind == ColumnKind::Boolean;
    }

    friend bool operator==(const ColumnProfile&, const ColumnProfile&) = default;
};

/// Share of observed cells one type must exceed to claim a column.
inline constexpr double kTypeShareThreshold = 0.6;

/// Counts cell types and assigns the column kind: Continuous when numbers
/// make up more than 60% of the observed cells, Categorical (Boolean with
/// exactly two labels) when text does, Excluded otherwise.
ColumnProfile profile_column(std::span<const Cell> column);

/// Bijection between text labels and codes 0..K-1, codes assigned in
/// ascending byte order of the labels.
class LabelMap {
public:
    LabelMap() = default;
    explicit LabelMap(std::vector<std::string> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    /// Throws DataError for an unknown label.
    int code(const std::string& label) const;
    const std::string& label(int code) const { return labels_.at(static_cast<std::size_t>(code)); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    friend bool operator==(const LabelMap& a, const LabelMap& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
    std::map<std::string, int, std::less<>> forward_;
};

/// Replaces each Text cell by its code. Requires a Categorical/Boolean
/// profile; a label outside `profile.categories` or a Number cell is a
/// DataError.
std::pair<std::vector<Cell>, LabelMap> encode_labels(std::span<const Cell> column,
                                                     const ColumnProfile& profile);

/// Rounds half-up to the nearest code, clamps into [0, K-1], and looks the
/// label up. Non-finite values are a DataError.
std::vector<Cell> decode_labels(std::span<const double> values, const LabelMap& map);
Cell decode_label(double value, const LabelMap& map);

// CSV ---------------------------------------------------------------------

/// Lexes a decimal or scientific float, allowing surrounding whitespace and
/// a leading sign. Returns false for anything else.
bool parse_number(std::string_view field, double& out);

Table parse_csv(std::istream& in);
Table parse_csv(std::string_view text);
Table read_csv(const std::filesystem::path& path);

/// Writes Missing as an empty field and quotes fields containing commas,
/// quotes, or line breaks. Numbers use the shortest round-trip form.
void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

std::string format_number(double v);

/// One CSV field, quoted when needed.
std::string csv_field(std::string_view s);

} // namespace tabimpute
