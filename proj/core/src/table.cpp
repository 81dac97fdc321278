#include "tabimpute/table.hpp"
#include "tabimpute/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace tabimpute {

Cell Cell::number(double v) {
    Cell c;
    if (std::isfinite(v)) c.value_ = v;
    return c;
}

Cell Cell::text(std::string s) {
    Cell c;
    if (!s.empty()) c.value_ = std::move(s);
    return c;
}

std::ostream& operator<<(std::ostream& os, const Cell& cell) {
    if (cell.is_number()) return os << format_number(cell.as_number());
    if (cell.is_text()) return os << '"' << cell.as_text() << '"';
    return os << "<missing>";
}

Table::Table(std::string id_header, std::vector<std::string> row_ids,
             std::vector<std::string> column_names, std::vector<Cell> cells)
    : id_header_(std::move(id_header)), row_ids_(std::move(row_ids)),
      column_names_(std::move(column_names)), cells_(std::move(cells)) {
    if (cells_.size() != row_ids_.size() * column_names_.size())
        throw DataError(fmt::format("table has {} cells but {} rows x {} columns", cells_.size(),
                                    row_ids_.size(), column_names_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : column_names_)
        if (!seen.insert(name).second) throw DataError(fmt::format("duplicate column name '{}'", name));
}

std::vector<Cell> Table::column(std::size_t col) const {
    std::vector<Cell> out;
    out.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) out.push_back(at(r, col));
    return out;
}

void Table::set_column(std::size_t col, std::span<const Cell> values) {
    if (values.size() != rows())
        throw DataError(fmt::format("column has {} values, table has {} rows", values.size(), rows()));
    for (std::size_t r = 0; r < rows(); ++r) set(r, col, values[r]);
}

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::Continuous: return "continuous";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Boolean: return "boolean";
    case ColumnKind::Excluded: return "excluded";
    }
    return "unknown";
}

ColumnProfile profile_column(std::span<const Cell> column) {
    ColumnProfile p;
    std::size_t n_number = 0;
    std::size_t n_text = 0;
    std::set<std::string, std::less<>> labels;
    for (const auto& c : column) {
        if (c.is_number()) {
            ++n_number;
        } else if (c.is_text()) {
            ++n_text;
            labels.insert(c.as_text());
        } else {
            ++p.n_missing;
        }
    }
    if (column.empty()) return p;
    const auto total = static_cast<double>(column.size());
    p.frac_numeric = static_cast<double>(n_number) / total;
    p.frac_text = static_cast<double>(n_text) / total;

    const std::size_t observed = n_number + n_text;
    if (observed == 0) return p;
    const double share_numeric = static_cast<double>(n_number) / static_cast<double>(observed);
    const double share_text = static_cast<double>(n_text) / static_cast<double>(observed);
    if (share_numeric > kTypeShareThreshold) {
        p.kind = ColumnKind::Continuous;
    } else if (share_text > kTypeShareThreshold) {
        p.kind = labels.size() == 2 ? ColumnKind::Boolean : ColumnKind::Categorical;
        p.categories.assign(labels.begin(), labels.end());
    }
    return p;
}

LabelMap::LabelMap(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    for (std::size_t i = 0; i < labels_.size(); ++i) forward_.emplace(labels_[i], static_cast<int>(i));
}

int LabelMap::code(const std::string& label) const {
    auto it = forward_.find(label);
    if (it == forward_.end()) throw DataError(fmt::format("label '{}' is not in the label map", label));
    return it->second;
}

std::pair<std::vector<Cell>, LabelMap> encode_labels(std::span<const Cell> column,
                                                     const ColumnProfile& profile) {
    if (!profile.categorical())
        throw DataError(fmt::format("cannot label-encode a {} column", to_string(profile.kind)));
    LabelMap map(profile.categories);
    std::vector<Cell> out;
    out.reserve(column.size());
    for (const auto& c : column) {
        if (c.is_missing()) {
            out.push_back(Cell::missing());
        } else if (c.is_text()) {
            out.push_back(Cell::number(map.code(c.as_text())));
        } else {
            throw DataError(fmt::format("numeric value {} in a categorical column", c.as_number()));
        }
    }
    return {std::move(out), std::move(map)};
}

Cell decode_label(double value, const LabelMap& map) {
    if (!std::isfinite(value)) throw DataError("cannot decode a non-finite label code");
    if (map.empty()) throw DataError("cannot decode with an empty label map");
    double code = std::floor(value + 0.5);
    code = std::clamp(code, 0.0, static_cast<double>(map.size() - 1));
    return Cell::text(map.label(static_cast<int>(code)));
}

std::vector<Cell> decode_labels(std::span<const double> values, const LabelMap& map) {
    std::vector<Cell> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(decode_label(v, map));
    return out;
}

// CSV ---------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

Cell lex_field(const std::string& raw) {
    const auto t = trim(raw);
    if (t.empty()) return Cell::missing();
    double v = 0.0;
    if (parse_number(t, v)) return Cell::number(v);
    return Cell::text(raw);
}

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// RFC-4180 reader. Returns false at end of input.
class CsvReader {
public:
    explicit CsvReader(std::string_view text) : text_(text) {
        if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
    }

    bool next(Record& rec) {
        rec.fields.clear();
        if (pos_ >= text_.size()) return false;
        rec.line = line_;
        std::string field;
        bool in_quotes = false;
        bool field_quoted = false;
        while (pos_ < text_.size()) {
            const char ch = text_[pos_++];
            if (in_quotes) {
                if (ch == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"' && !field_quoted && trim(field).empty()) {
                field.clear();
                in_quotes = true;
                field_quoted = true;
            } else if (ch == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
                field_quoted = false;
            } else if (ch == '\n' || ch == '\r') {
                if (ch == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
                ++line_;
                rec.fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
            }
        }
        if (in_quotes) throw ParseError(fmt::format("line {}: unterminated quoted field", rec.line), rec.line);
        rec.fields.push_back(std::move(field));
        return true;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

bool blank(const Record& rec) {
    return rec.fields.size() == 1 && trim(rec.fields.front()).empty();
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos || trim(s).size() != s.size();
}

void write_field(std::ostream& out, std::string_view s) {
    if (!needs_quotes(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char ch : s) {
        if (ch == '"') out << '"';
        out << ch;
    }
    out << '"';
}

} // namespace

bool parse_number(std::string_view field, double& out) {
    auto t = trim(field);
    if (t.empty()) return false;
    if (t.front() == '+') {
        t.remove_prefix(1);
        if (t.empty() || t.front() == '-' || t.front() == '+') return false;
    }
    // from_chars accepts inf/nan spellings; only plain decimal forms count.
    const auto first = t.front() == '-' ? t.substr(1) : t;
    if (first.empty() || !(std::isdigit(static_cast<unsigned char>(first.front())) || first.front() == '.'))
        return false;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::general);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return false;
    out = v;
    return true;
}

Table parse_csv(std::string_view text) {
    CsvReader reader(text);
    Record rec;
    while (reader.next(rec) && blank(rec)) {
    }
    if (rec.fields.empty() || blank(rec)) throw ParseError("input has no header row", 0);
    if (rec.fields.size() < 2)
        throw ParseError(fmt::format("line {}: header needs an ID column and at least one feature column", rec.line),
                         rec.line);

    const std::string id_header = rec.fields.front();
    std::vector<std::string> names(rec.fields.begin() + 1, rec.fields.end());
    {
        std::unordered_set<std::string> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second)
                throw ParseError(fmt::format("line {}: duplicate column name '{}'", rec.line, n), rec.line);
    }

    std::vector<std::string> ids;
    std::vector<Cell> cells;
    std::size_t data_row = 0;
    while (reader.next(rec)) {
        if (blank(rec)) continue;
        ++data_row;
        if (rec.fields.size() != names.size() + 1)
            throw ParseError(fmt::format("line {} (data row {}): expected {} fields, found {}", rec.line, data_row,
                                         names.size() + 1, rec.fields.size()),
                             rec.line);
        ids.push_back(rec.fields.front());
        for (std::size_t c = 1; c < rec.fields.size(); ++c) cells.push_back(lex_field(rec.fields[c]));
    }
    if (ids.empty()) throw ParseError("input has a header but no data rows", 0);
    return Table(id_header, std::move(ids), std::move(names), std::move(cells));
}

Table parse_csv(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_csv(std::string_view(text));
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}' for reading", path.string()));
    return parse_csv(in);
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Table& table) {
    write_field(out, table.id_header());
    for (const auto& name : table.column_names()) {
        out << ',';
        write_field(out, name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        write_field(out, table.row_ids()[r]);
        for (std::size_t c = 0; c < table.cols(); ++c) {
            out << ',';
            const Cell& cell = table.at(r, c);
            if (cell.is_number()) {
                out << format_number(cell.as_number());
            } else if (cell.is_text()) {
                write_field(out, cell.as_text());
            }
        }
        out << '\n';
    }
}

std::string csv_field(std::string_view s) {
    std::ostringstream os;
    write_field(os, s);
    return os.str();
}

std::string to_csv(const Table& table) {
    std::ostringstream os;
    write_csv(os, table);
    return os.str();
}

void write_csv(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    write_csv(out, table);
    if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

} // namespace tabimpute
