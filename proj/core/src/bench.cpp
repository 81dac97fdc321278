#include "tabimpute/bench.hpp"
#include "tabimpute/errors.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace tabimpute {

namespace {

bool in_scope(const ColumnProfile& p, MaskScope scope) {
    switch (scope) {
    case MaskScope::AllImputable: return p.imputable();
    case MaskScope::ContinuousOnly: return p.kind == ColumnKind::Continuous;
    case MaskScope::CategoricalOnly: return p.categorical();
    }
    return false;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string fraction_label(double f) { return format_number(f); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
}

} // namespace

std::string_view to_string(MaskScope scope) {
    switch (scope) {
    case MaskScope::AllImputable: return "all";
    case MaskScope::ContinuousOnly: return "continuous";
    case MaskScope::CategoricalOnly: return "categorical";
    }
    return "unknown";
}

std::optional<MaskScope> parse_mask_scope(std::string_view name) {
    const auto n = lower(name);
    if (n == "all") return MaskScope::AllImputable;
    if (n == "continuous") return MaskScope::ContinuousOnly;
    if (n == "categorical") return MaskScope::CategoricalOnly;
    return std::nullopt;
}

MaskResult mask_random(const Table& table, const MaskSpec& spec) {
    if (!(spec.fraction > 0.0 && spec.fraction < 1.0))
        throw ValidationError("fraction", fmt::format("mask fraction must be strictly between 0 and 1 (got {})",
                                                      spec.fraction));
    const auto profiles = classify_columns(normalize_missing_tokens(table)).second;

    std::vector<std::pair<std::size_t, std::size_t>> eligible;
    std::vector<std::size_t> observed(table.cols(), 0);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            const Cell& cell = table.at(r, c);
            if (cell.is_missing()) continue;
            ++observed[c];
            const auto& p = profiles[c];
            if (!in_scope(p, spec.scope)) continue;
            if ((p.kind == ColumnKind::Continuous && cell.is_number()) || (p.categorical() && cell.is_text()))
                eligible.emplace_back(r, c);
        }
    }
    if (eligible.empty()) throw DataError(fmt::format("no observed cells in scope '{}' to mask", to_string(spec.scope)));

    // The epsilon absorbs representation error in fraction * count.
    const auto target =
        static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(eligible.size()) + 1e-9));

    Rng rng(spec.seed);
    rng.shuffle(eligible);

    MaskResult out{table, {}};
    out.truth.reserve(target);
    for (const auto& [r, c] : eligible) {
        if (out.truth.size() == target) break;
        if (observed[c] <= 1) continue;
        --observed[c];
        out.truth.push_back({r, c, table.at(r, c)});
        out.masked.set(r, c, Cell::missing());
    }
    if (out.truth.size() < target)
        throw DataError(fmt::format("cannot mask {} cells without emptying a column (fraction {})", target,
                                    spec.fraction));
    std::sort(out.truth.begin(), out.truth.end(),
              [](const MaskedCell& a, const MaskedCell& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    return out;
}

Table unmask(Table masked, std::span<const MaskedCell> truth) {
    for (const auto& t : truth) masked.set(t.row, t.col, t.original);
    return masked;
}

double rmse(const Table& imputed, std::span<const MaskedCell> truth) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& t : truth) {
        if (!t.original.is_number()) continue;
        const Cell& got = imputed.at(t.row, t.col);
        if (!got.is_number())
            throw DataError(fmt::format("cell ({}, {}) was not imputed with a number", t.row, t.col));
        const double d = got.as_number() - t.original.as_number();
        total += d * d;
        ++count;
    }
    if (count == 0) throw DataError("rmse needs at least one masked numeric cell");
    return std::sqrt(total / static_cast<double>(count));
}

double categorical_accuracy(const Table& imputed, std::span<const MaskedCell> truth) {
    std::size_t hits = 0;
    std::size_t count = 0;
    for (const auto& t : truth) {
        if (!t.original.is_text()) continue;
        ++count;
        if (imputed.at(t.row, t.col) == t.original) ++hits;
    }
    if (count == 0) throw DataError("categorical accuracy needs at least one masked text cell");
    return static_cast<double>(hits) / static_cast<double>(count);
}

std::string BenchMethod::name() const {
    switch (kind) {
    case Kind::Mean: return "mean";
    case Kind::Knn: return fmt::format("knn:{}", k);
    case Kind::Engine: return "engine";
    }
    return "unknown";
}

std::optional<BenchMethod> parse_bench_method(std::string_view name) {
    const auto n = lower(name);
    if (n == "mean") return BenchMethod::mean();
    if (n == "engine") return BenchMethod::engine();
    if (n == "knn") return BenchMethod::knn();
    if (n.starts_with("knn:")) {
        int k = 0;
        const auto digits = std::string_view(n).substr(4);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1) return std::nullopt;
        return BenchMethod::knn(k);
    }
    return std::nullopt;
}

Table baseline_impute(const Table& table, const BenchMethod& method) {
    if (method.kind == BenchMethod::Kind::Engine) throw DataError("baseline_impute does not run the engine");
    const auto strategy =
        method.kind == BenchMethod::Kind::Mean ? PreImputeStrategy::column_mean() : PreImputeStrategy::knn(method.k);
    const auto triple = preprocessing_df(table, false, strategy);
    return reassemble(triple, triple.preimputed);
}

BenchReport run_benchmark(const Table& table, std::span<const double> fractions, std::span<const BenchMethod> methods,
                          const ImputeConfig& config, std::uint64_t seed, const BenchOptions& options) {
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0))
            throw ValidationError("fractions", fmt::format("fractions must lie strictly between 0 and 1 (got {})", f));
    if (options.repetitions < 1)
        throw ValidationError("repetitions", fmt::format("repetitions must be positive (got {})", options.repetitions));

    ImputeConfig engine_config = config;
    engine_config.export_intermediates = false;
    engine_config.save_result = false;
    engine_config.save_plots = false;
    engine_config.output_dir.clear();
    engine_config.validate();

    const auto original_profiles = classify_columns(normalize_missing_tokens(table)).second;

    BenchReport report;
    for (double fraction : fractions) {
        std::optional<MaskResult> mask;
        std::string mask_error;
        try {
            mask = mask_random(table, MaskSpec{fraction, seed, options.scope});
        } catch (const Error& e) {
            mask_error = e.what();
        }

        for (const auto& method : methods) {
            BenchRow row;
            row.method = method.name();
            row.fraction = fraction;
            if (!mask) {
                row.error = mask_error;
                report.rows.push_back(std::move(row));
                continue;
            }
            row.n_masked = mask->truth.size();
            try {
                std::vector<double> times;
                Table imputed;
                for (int rep = 0; rep < options.repetitions; ++rep) {
                    const auto start = std::chrono::steady_clock::now();
                    imputed = method.kind == BenchMethod::Kind::Engine ? xpute(mask->masked, engine_config).imputed
                                                                       : baseline_impute(mask->masked, method);
                    times.push_back(
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
                }
                std::sort(times.begin(), times.end());
                row.wall_time_ms = times[times.size() / 2];

                const bool any_numeric = std::any_of(mask->truth.begin(), mask->truth.end(),
                                                     [](const MaskedCell& t) { return t.original.is_number(); });
                const bool any_text = std::any_of(mask->truth.begin(), mask->truth.end(),
                                                  [](const MaskedCell& t) { return t.original.is_text(); });
                if (any_numeric) {
                    row.rmse = rmse(imputed, mask->truth);
                    row.mse = *row.rmse * *row.rmse;
                }
                if (any_text) row.categorical_accuracy = categorical_accuracy(imputed, mask->truth);

                if (options.densities) {
                    for (std::size_t c = 0; c < table.cols(); ++c) {
                        if (original_profiles[c].kind != ColumnKind::Continuous) continue;
                        const bool masked_here = std::any_of(mask->truth.begin(), mask->truth.end(),
                                                             [&](const MaskedCell& t) { return t.col == c; });
                        if (!masked_here) continue;
                        std::vector<double> reference;
                        std::vector<double> candidate;
                        for (std::size_t r = 0; r < table.rows(); ++r) {
                            if (table.at(r, c).is_number()) reference.push_back(table.at(r, c).as_number());
                            if (imputed.at(r, c).is_number()) candidate.push_back(imputed.at(r, c).as_number());
                        }
                        if (reference.empty() || candidate.empty()) continue;
                        report.densities.push_back(
                            {row.method, fraction, table.column_names()[c], density_curve(reference, candidate)});
                    }
                }
            } catch (const Error& e) {
                row.error = e.what();
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
    out << "method,fraction,metric,value\n";
    auto line = [&](const BenchRow& r, std::string_view metric, const std::string& value) {
        out << r.method << ',' << fraction_label(r.fraction) << ',' << metric << ',' << value << '\n';
    };
    for (const auto& r : report.rows) {
        if (!r.error.empty()) {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), '"', '\'');
            line(r, "error", "\"" + msg + "\"");
            continue;
        }
        if (r.rmse) line(r, "rmse", format_number(*r.rmse));
        if (r.mse) line(r, "mse", format_number(*r.mse));
        if (r.categorical_accuracy) line(r, "categorical_accuracy", format_number(*r.categorical_accuracy));
        line(r, "wall_time_ms", format_number(r.wall_time_ms));
        line(r, "n_masked", std::to_string(r.n_masked));
    }
}

std::string bench_json(const BenchReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row = {
            {"method", r.method},
            {"fraction", r.fraction},
            {"n_masked", r.n_masked},
            {"rmse", opt(r.rmse)},
            {"mse", opt(r.mse)},
            {"categorical_accuracy", opt(r.categorical_accuracy)},
            {"wall_time_ms", r.wall_time_ms},
        };
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"rows", std::move(rows)}}.dump(2) + "\n";
}

void write_density_csv(std::ostream& out, const BenchReport& report) {
    out << "method,fraction,column,abscissa,density_original,density_imputed\n";
    for (const auto& d : report.densities) {
        for (std::size_t i = 0; i < d.curve.abscissae.size(); ++i) {
            out << d.method << ',' << fraction_label(d.fraction) << ',' << csv_field(d.column) << ','
                << format_number(d.curve.abscissae[i]) << ','
                << format_number(d.curve.reference[i]) << ',' << format_number(d.curve.candidate[i]) << '\n';
        }
    }
}

void write_bench_outputs(const std::filesystem::path& dir, const BenchReport& report, bool plots) {
    std::filesystem::create_directories(dir);
    {
        std::ostringstream os;
        write_bench_csv(os, report);
        write_file(dir / "bench.csv", os.str());
    }
    write_file(dir / "bench.json", bench_json(report));
    {
        std::ostringstream os;
        write_density_csv(os, report);
        write_file(dir / "densities.csv", os.str());
    }
    if (!plots) return;
    for (const auto& d : report.densities) {
        std::string file = fmt::format("density_{}_{}_{}.svg", d.column, d.method, fraction_label(d.fraction));
        std::replace_if(file.begin(), file.end(), [](char c) { return c == '/' || c == '\\' || c == ' ' || c == ':'; },
                        '_');
        write_file(dir / file,
                   render_density_svg(d.curve, fmt::format("{} ({}, {})", d.column, d.method, d.fraction), "original",
                                      "imputed"));
    }
}

} // namespace tabimpute
