#include "tabimpute/cli.hpp"

#include "tabimpute/bench.hpp"
#include "tabimpute/errors.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/table.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>

namespace tabimpute::cli {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

std::optional<bool> parse_bool(std::string_view s) {
    const auto v = lower(s);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    return std::nullopt;
}

template <typename T>
std::optional<T> parse_integer(std::string_view s) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

// Returns an empty string on success, otherwise a description of the
// accepted values.
using Setter = std::function<std::string(ImputeConfig&, std::string_view)>;

Setter bool_field(bool ImputeConfig::*field) {
    return [field](ImputeConfig& c, std::string_view v) -> std::string {
        const auto b = parse_bool(v);
        if (!b) return "expected true or false";
        c.*field = *b;
        return {};
    };
}

Setter int_field(int ImputeConfig::*field) {
    return [field](ImputeConfig& c, std::string_view v) -> std::string {
        const auto i = parse_integer<int>(v);
        if (!i) return "expected an integer";
        c.*field = *i;
        return {};
    };
}

struct ConfigKey {
    std::string canonical;
    Setter set;
};

const std::map<std::string, ConfigKey, std::less<>>& config_keys() {
    static const auto keys = [] {
        std::map<std::string, ConfigKey, std::less<>> k;
        auto add = [&](std::initializer_list<std::string> names, Setter set) {
            const std::string canonical = *names.begin();
            for (const auto& n : names) k.emplace(n, ConfigKey{canonical, set});
        };
        add({"impute_zeros"}, bool_field(&ImputeConfig::impute_zeros));
        add({"pre_imputation"}, [](ImputeConfig& c, std::string_view v) -> std::string {
            const auto kind = parse_strategy_kind(v);
            if (!kind) return "expected MixType, ColumnMean or KNNImputer";
            c.pre_imputation.kind = *kind;
            return {};
        });
        add({"knn_k"}, [](ImputeConfig& c, std::string_view v) -> std::string {
            const auto i = parse_integer<int>(v);
            if (!i) return "expected an integer";
            c.pre_imputation.k = *i;
            return {};
        });
        add({"ensemble_size", "xgb_models"}, int_field(&ImputeConfig::ensemble_size));
        add({"mf_nan_replace", "mf_for_xgb"}, bool_field(&ImputeConfig::mf_nan_replace));
        add({"use_full_transform", "use_transformed_df"}, bool_field(&ImputeConfig::use_full_transform));
        add({"search_enabled", "optuna_for_xgb"}, bool_field(&ImputeConfig::search_enabled));
        add({"search_trials", "optuna_n_trials"}, int_field(&ImputeConfig::search_trials));
        add({"n_iterations"}, int_field(&ImputeConfig::n_iterations));
        add({"export_intermediates"}, bool_field(&ImputeConfig::export_intermediates));
        add({"save_result", "save_imputed_df"}, bool_field(&ImputeConfig::save_result));
        add({"save_plots"}, bool_field(&ImputeConfig::save_plots));
        add({"seed"}, [](ImputeConfig& c, std::string_view v) -> std::string {
            const auto s = parse_integer<std::uint64_t>(v);
            if (!s) return "expected a non-negative integer";
            c.seed = *s;
            return {};
        });
        add({"output_dir"}, [](ImputeConfig& c, std::string_view v) -> std::string {
            if (v.empty()) return "expected a directory path";
            c.output_dir = fs::path(std::string(v));
            return {};
        });
        return k;
    }();
    return keys;
}

struct FlagInfo {
    const char* flag;
    const char* range;
};

std::optional<FlagInfo> flag_for(std::string_view field) {
    if (field == "ensemble_size") return FlagInfo{"--ensemble-size", "3..9"};
    if (field == "search_trials") return FlagInfo{"--search-trials", "5..50"};
    if (field == "n_iterations") return FlagInfo{"--iterations", "1..9"};
    if (field == "knn_k") return FlagInfo{"--knn-k", "1..rows-1"};
    if (field == "use_full_transform" || field == "mf_nan_replace")
        return FlagInfo{"--full-transform", "not together with --mf-nan-replace"};
    if (field == "output_dir") return FlagInfo{"--output-dir", "a writable directory"};
    return std::nullopt;
}

void check_range(const char* flag, long long value, long long lo, long long hi) {
    if (value < lo || value > hi)
        throw ValidationError(flag, fmt::format("{} must be in the range {}..{} (got {})", flag, lo, hi, value));
}

struct EngineFlags {
    int ensemble_size = 0;
    std::string pre_imputation;
    int knn_k = 0;
    int search_trials = 0;
    int iterations = 0;
    bool impute_zeros = false;
    bool mf_nan_replace = false;
    bool full_transform = false;
    bool search = false;
    bool export_intermediates = false;
    bool save_plots = false;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string config;
    bool verbose = false;

    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        const auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_engine_flags(CLI::App* sub, EngineFlags& f, bool with_exports) {
    auto& o = f.opts;
    o["ensemble-size"] = sub->add_option("--ensemble-size", f.ensemble_size, "Boosted models averaged per column (3..9)");
    o["pre-imputation"] =
        sub->add_option("--pre-imputation", f.pre_imputation, "MixType, ColumnMean or KNNImputer");
    o["knn-k"] = sub->add_option("--knn-k", f.knn_k, "Neighbours for KNN pre-imputation (1..rows-1)");
    o["search-trials"] = sub->add_option("--search-trials", f.search_trials, "Hyperparameter search trials (5..50)");
    o["iterations"] = sub->add_option("--iterations", f.iterations, "Imputation passes (1..9)");
    o["impute-zeros"] = sub->add_flag("--impute-zeros,!--no-impute-zeros", f.impute_zeros, "Treat 0 as missing");
    o["mf-nan-replace"] = sub->add_flag("--mf-nan-replace,!--no-mf-nan-replace", f.mf_nan_replace,
                                        "Use the factorization at missing cells of the learner input");
    o["full-transform"] = sub->add_flag("--full-transform,!--no-full-transform", f.full_transform,
                                        "Use the full factorization reconstruction as learner input");
    o["search"] = sub->add_flag("--search,!--no-search", f.search, "Enable hyperparameter search");
    if (with_exports)
        o["export-intermediates"] = sub->add_flag("--export-intermediates,!--no-export-intermediates",
                                                  f.export_intermediates, "Write intermediate matrices");
    o["save-plots"] = sub->add_flag("--save-plots,!--no-save-plots", f.save_plots, "Write density plots (SVG)");
    o["seed"] = sub->add_option("--seed", f.seed, "Random seed");
    o["output-dir"] = sub->add_option("--output-dir,-o", f.output_dir, "Output directory");
    o["config"] = sub->add_option("--config,-c", f.config, "key = value configuration file");
    sub->add_flag("--verbose,-v", f.verbose, "Per-column log lines on stderr");
}

ImputeConfig build_config(const EngineFlags& f) {
    ImputeConfig c = f.config.empty() ? ImputeConfig{} : load_config_file(f.config);
    if (f.given("ensemble-size")) {
        check_range("--ensemble-size", f.ensemble_size, kMinEnsembleSize, kMaxEnsembleSize);
        c.ensemble_size = f.ensemble_size;
    }
    if (f.given("pre-imputation")) {
        const auto kind = parse_strategy_kind(f.pre_imputation);
        if (!kind)
            throw ValidationError("--pre-imputation",
                                  fmt::format("--pre-imputation must be one of MixType, ColumnMean, KNNImputer (got "
                                              "'{}')",
                                              f.pre_imputation));
        c.pre_imputation.kind = *kind;
    }
    if (f.given("knn-k")) {
        if (f.knn_k < 1)
            throw ValidationError("--knn-k", fmt::format("--knn-k must be in the range 1..rows-1 (got {})", f.knn_k));
        c.pre_imputation.k = f.knn_k;
    }
    if (f.given("search-trials")) {
        check_range("--search-trials", f.search_trials, kMinSearchTrials, kMaxSearchTrials);
        c.search_trials = f.search_trials;
    }
    if (f.given("iterations")) {
        check_range("--iterations", f.iterations, kMinIterations, kMaxIterations);
        c.n_iterations = f.iterations;
    }
    if (f.given("impute-zeros")) c.impute_zeros = f.impute_zeros;
    if (f.given("mf-nan-replace")) c.mf_nan_replace = f.mf_nan_replace;
    if (f.given("full-transform")) c.use_full_transform = f.full_transform;
    if (f.given("search")) c.search_enabled = f.search;
    if (f.given("export-intermediates")) c.export_intermediates = f.export_intermediates;
    if (f.given("save-plots")) c.save_plots = f.save_plots;
    if (f.given("seed")) c.seed = f.seed;
    return c;
}

// flag > config file > environment > directory of the input file
fs::path resolve_output_dir(const EngineFlags& f, const ImputeConfig& config, const fs::path& input) {
    if (f.given("output-dir")) return f.output_dir;
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    const auto parent = input.parent_path();
    return parent.empty() ? fs::path(".") : parent;
}

void require_readable(const fs::path& input) {
    std::error_code ec;
    if (!fs::is_regular_file(input, ec))
        throw ValidationError("input", fmt::format("input file '{}' does not exist or is not a regular file",
                                                   input.string()));
    std::ifstream probe(input, std::ios::binary);
    if (!probe) throw ValidationError("input", fmt::format("input file '{}' is not readable", input.string()));
}

Table load_table(const fs::path& input) {
    try {
        return read_csv(input);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", input.string(), e.what()), e.line());
    }
}

LogFn make_log(bool verbose, std::ostream& err) {
    if (!verbose) return {};
    return [&err](std::string_view line) { err << line << '\n'; };
}

int cmd_impute(const fs::path& input, const EngineFlags& f, std::ostream& out, std::ostream& err) {
    ImputeConfig config = build_config(f);
    require_readable(input);
    const fs::path dir = resolve_output_dir(f, config, input);
    config.output_dir = dir;
    config.save_result = false; // the tool writes its own result files
    config.validate();

    const Table table = load_table(input);
    const auto result = xpute(table, config, make_log(f.verbose, err));

    fs::create_directories(dir);
    const fs::path csv = dir / (input.stem().string() + "_imputed.csv");
    const fs::path json = dir / "report.json";
    write_csv(csv, result.imputed);
    {
        std::ofstream js(json, std::ios::binary);
        if (!js) throw Error(fmt::format("cannot write '{}'", json.string()));
        js << to_json(result.report) << '\n';
    }
    for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
    out << "imputed " << result.report.columns.size() << " column(s)\n";
    out << "wrote " << csv.string() << '\n';
    out << "wrote " << json.string() << '\n';
    return kExitOk;
}

struct BenchFlags {
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4};
    std::vector<std::string> methods{"mean", "knn", "engine"};
    std::string scope = "all";
    int repetitions = 1;
};

int cmd_bench(const fs::path& input, const EngineFlags& f, const BenchFlags& b, std::ostream& out,
              std::ostream& err) {
    ImputeConfig config = build_config(f);
    require_readable(input);
    const fs::path dir = resolve_output_dir(f, config, input);
    const bool plots = config.save_plots;
    config.export_intermediates = false;
    config.save_result = false;
    config.save_plots = false;
    config.output_dir.clear();
    config.validate();

    for (double fr : b.fractions)
        if (!(fr > 0.0 && fr < 1.0))
            throw ValidationError("--fractions",
                                  fmt::format("--fractions values must lie strictly between 0 and 1 (got {})", fr));
    std::vector<BenchMethod> methods;
    for (const auto& m : b.methods) {
        const auto parsed = parse_bench_method(m);
        if (!parsed)
            throw ValidationError("--methods",
                                  fmt::format("--methods entries must be mean, knn, knn:<k> or engine (got '{}')", m));
        methods.push_back(*parsed);
    }
    const auto scope = parse_mask_scope(b.scope);
    if (!scope)
        throw ValidationError("--scope",
                              fmt::format("--scope must be all, continuous or categorical (got '{}')", b.scope));
    check_range("--repetitions", b.repetitions, 1, 100);

    const Table table = load_table(input);
    BenchOptions options;
    options.scope = *scope;
    options.repetitions = b.repetitions;
    const auto report = run_benchmark(table, b.fractions, methods, config, config.seed, options);

    fs::create_directories(dir);
    write_bench_outputs(dir, report, plots);

    out << fmt::format("{:<10} {:>8} {:>8} {:>12} {:>10} {:>12}\n", "method", "fraction", "masked", "rmse",
                       "accuracy", "time_ms");
    for (const auto& row : report.rows) {
        auto opt = [](const std::optional<double>& v, const char* spec) {
            return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
        };
        out << fmt::format("{:<10} {:>8.2f} {:>8} {:>12} {:>10} {:>12.1f}\n", row.method, row.fraction, row.n_masked,
                           opt(row.rmse, "{:.6g}"), opt(row.categorical_accuracy, "{:.4f}"), row.wall_time_ms);
        if (!row.error.empty()) err << "warning: " << row.method << " @ " << row.fraction << ": " << row.error << '\n';
    }
    out << "wrote " << (dir / "bench.csv").string() << '\n';
    return kExitOk;
}

int cmd_inspect(const fs::path& input, bool impute_zeros, std::ostream& out) {
    require_readable(input);
    Table table = normalize_missing_tokens(load_table(input));
    if (impute_zeros) table = zeros_to_missing(std::move(table));
    const auto [clean, profiles] = classify_columns(std::move(table));

    out << fmt::format("{} rows, {} columns\n", clean.rows(), clean.cols());
    out << fmt::format("{:<24} {:<12} {:>8} {:>10}\n", "column", "kind", "missing", "categories");
    for (std::size_t c = 0; c < profiles.size(); ++c) {
        const auto& p = profiles[c];
        const std::string cats = p.categorical() ? std::to_string(p.categories.size()) : std::string("-");
        out << fmt::format("{:<24} {:<12} {:>8} {:>10}\n", clean.column_names()[c], to_string(p.kind), p.n_missing,
                           cats);
    }
    return kExitOk;
}

} // namespace

ImputeConfig load_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", fmt::format("cannot read config file '{}'", path.string()));

    ImputeConfig config;
    std::map<std::string, std::size_t> seen; // canonical key -> line
    std::string raw;
    std::size_t line_no = 0;
    const auto& keys = config_keys();
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config", fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
        const auto key = trim(line.substr(0, eq));
        const auto value = unquote(trim(line.substr(eq + 1)));
        const auto it = keys.find(key);
        if (it == keys.end())
            throw ValidationError("config",
                                  fmt::format("{}:{}: unknown key '{}'", path.string(), line_no, key));
        const auto& entry = it->second;
        if (const auto [prev, fresh] = seen.emplace(entry.canonical, line_no); !fresh)
            throw ValidationError("config", fmt::format("{}:{}: '{}' already set on line {}", path.string(),
                                                               line_no, key, prev->second));
        if (const auto problem = entry.set(config, value); !problem.empty())
            throw ValidationError("config", fmt::format("{}:{}: bad value '{}' for {}: {}", path.string(),
                                                               line_no, value, key, problem));
    }

    // output_dir may legitimately come from the command line later.
    ImputeConfig probe = config;
    if (probe.output_dir.empty()) probe.output_dir = ".";
    try {
        probe.validate();
    } catch (const ValidationError& e) {
        const auto it = seen.find(e.parameter());
        const std::size_t at = it != seen.end() ? it->second : 0;
        throw ValidationError("config", fmt::format("{}:{}: {}", path.string(), at, e.what()));
    }
    return config;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Missing-value imputation for mixed-type CSV tables", "tabimpute"};
    app.set_version_flag("--version", std::string(TABIMPUTE_VERSION));
    app.require_subcommand(1);

    std::string input;
    EngineFlags impute_flags;
    auto* impute = app.add_subcommand("impute", "Impute every missing cell; writes <stem>_imputed.csv and report.json");
    impute->add_option("input", input, "Input CSV (first column = sample IDs)")->required();
    add_engine_flags(impute, impute_flags, true);

    EngineFlags bench_flags;
    BenchFlags bench_extra;
    auto* bench = app.add_subcommand("bench", "Mask observed cells, impute and score against the truth");
    bench->add_option("input", input, "Complete (or mostly complete) input CSV")->required();
    add_engine_flags(bench, bench_flags, false);
    bench->add_option("--fractions", bench_extra.fractions, "Comma-separated masking fractions in (0, 1)")
        ->delimiter(',');
    bench->add_option("--methods", bench_extra.methods, "Comma-separated: mean, knn, knn:<k>, engine")
        ->delimiter(',');
    bench->add_option("--scope", bench_extra.scope, "Cells eligible for masking: all, continuous, categorical");
    bench->add_option("--repetitions", bench_extra.repetitions, "Timed repetitions per cell (median reported)");

    bool inspect_zeros = false;
    auto* inspect = app.add_subcommand("inspect", "Print column profiles without imputing");
    inspect->add_option("input", input, "Input CSV")->required();
    inspect->add_flag("--impute-zeros", inspect_zeros, "Treat 0 as missing");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (impute->parsed()) return cmd_impute(input, impute_flags, out, err);
        if (bench->parsed()) return cmd_bench(input, bench_flags, bench_extra, out, err);
        return cmd_inspect(input, inspect_zeros, out);
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        if (const auto info = flag_for(e.parameter()); info && msg.find("--") == std::string::npos)
            msg = fmt::format("{} (legal range: {}): {}", info->flag, info->range, msg);
        err << "error: " << msg << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace tabimpute::cli
