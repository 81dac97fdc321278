#include "tabimpute/engine.hpp"
#include "tabimpute/density.hpp"
#include "tabimpute/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

namespace tabimpute {

namespace {

constexpr std::size_t kSearchMinSamples = 50; // strictly more required
constexpr std::size_t kSearchMinRatio = 4;
constexpr std::size_t kSearchMaxMissingColumns = 100;
constexpr std::uint64_t kColumnSeedStride = 1000;
constexpr std::uint64_t kSearchSeedOffset = 500;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void log_line(const ImputeState& state, const std::string& line) {
    if (state.log) state.log(line);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
}

void export_matrix(const std::filesystem::path& path, const Matrix& m, const ImputeState& state) {
    write_csv(path, matrix_table(m, state.data.clean, state.data.matrix_column_names()));
}

// Majority vote; ties go to the lowest code.
int vote(const std::vector<int>& ballots, int n_classes) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int b : ballots) ++counts[static_cast<std::size_t>(b)];
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<double> fallback_predictions(const ColumnPlan& plan, const ImputeState& state) {
    std::vector<double> out;
    for (Index r : plan.missing_rows) out.push_back(state.data.preimputed(r, plan.matrix_column));
    return out;
}

void write_predictions(const ColumnPlan& plan, ImputeState& state, const std::vector<double>& predictions) {
    const auto& map = state.data.maps[plan.column];
    for (std::size_t t = 0; t < plan.missing_rows.size(); ++t) {
        const Index r = plan.missing_rows[t];
        state.encoded(r, plan.matrix_column) = predictions[t];
        state.design(r, plan.matrix_column) = predictions[t];
        state.clean.set(static_cast<std::size_t>(r), plan.column,
                        map ? decode_label(predictions[t], *map) : Cell::number(predictions[t]));
    }
}

void save_plots(const ImputeState& state, const std::filesystem::path& dir) {
    for (const auto& plan : state.plans) {
        if (plan.kind != ColumnKind::Continuous) continue;
        std::vector<double> observed;
        std::vector<double> completed;
        for (Index i = 0; i < state.encoded.rows(); ++i) {
            const double v = state.data.encoded(i, plan.matrix_column);
            if (!is_missing(v)) observed.push_back(v);
            completed.push_back(state.encoded(i, plan.matrix_column));
        }
        const auto& name = state.clean.column_names()[plan.column];
        const auto curve = density_curve(observed, completed);
        std::string file = "density_" + name + ".svg";
        std::replace_if(file.begin(), file.end(), [](char c) { return c == '/' || c == '\\' || c == ' '; }, '_');
        write_text(dir / file, render_density_svg(curve, name, "observed", "after imputation"));
    }
}

} // namespace

void ImputeConfig::validate() const {
    auto range = [](const char* name, int value, int lo, int hi) {
        if (value < lo || value > hi)
            throw ValidationError(name, fmt::format("{} must be between {} and {} (got {})", name, lo, hi, value));
    };
    range("ensemble_size", ensemble_size, kMinEnsembleSize, kMaxEnsembleSize);
    range("search_trials", search_trials, kMinSearchTrials, kMaxSearchTrials);
    range("n_iterations", n_iterations, kMinIterations, kMaxIterations);
    if (pre_imputation.uses_knn() && pre_imputation.k < 1)
        throw ValidationError("knn_k", fmt::format("knn_k must be at least 1 (got {})", pre_imputation.k));
    if (mf_nan_replace && use_full_transform)
        throw ValidationError("use_full_transform", "mf_nan_replace and use_full_transform cannot both be set");
    if ((export_intermediates || save_result || save_plots) && output_dir.empty())
        throw ValidationError("output_dir", "output_dir is required when exporting, saving results or plots");
}

bool gate_search(std::size_t n_samples, std::size_t n_features, std::size_t n_missing_columns) {
    if (n_samples <= kSearchMinSamples) return false;
    if (n_features == 0 || n_samples < kSearchMinRatio * n_features) return false;
    return n_missing_columns <= kSearchMaxMissingColumns;
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t column, int member) {
    return seed + kColumnSeedStride * static_cast<std::uint64_t>(column) + static_cast<std::uint64_t>(member);
}

double iteration_delta(const Matrix& previous, const Matrix& current, const Mask& missing) {
    if (previous.rows() != current.rows() || previous.cols() != current.cols() || missing.rows() != current.rows() ||
        missing.cols() != current.cols())
        throw DataError("iteration_delta: shape mismatch");
    double total = 0.0;
    Index count = 0;
    for (Index j = 0; j < current.cols(); ++j) {
        for (Index i = 0; i < current.rows(); ++i) {
            if (!missing(i, j)) continue;
            total += std::abs(current(i, j) - previous(i, j));
            ++count;
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

ImputeState initialize(const Table& table, const ImputeConfig& config) {
    config.validate();
    if (table.rows() == 0 || table.cols() == 0) throw DataError("cannot impute an empty table");

    ImputeState state;
    auto start = Clock::now();
    state.data = preprocessing_df(table, config.impute_zeros, config.pre_imputation);
    state.report.preprocess_ms = elapsed_ms(start);
    state.report.warnings = state.data.warnings;
    state.clean = state.data.clean;
    state.encoded = state.data.encoded;
    state.design = state.data.preimputed;

    if (config.mf_nan_replace || config.use_full_transform) {
        start = Clock::now();
        NmfOptions options;
        options.seed = config.seed;
        auto fact = adaptive_factorize(state.data.encoded, state.data.preimputed, options);
        state.design = config.use_full_transform ? std::move(fact.fully_transformed) : std::move(fact.nan_replaced);
        state.report.factorization = fact.method;
        state.report.factorization_rank = fact.rank;
        state.report.factorize_ms = elapsed_ms(start);
    }

    const auto& encoded = state.data.encoded;
    for (Index j = 0; j < encoded.cols(); ++j) {
        ColumnPlan plan;
        plan.matrix_column = j;
        plan.column = state.data.imputable[static_cast<std::size_t>(j)];
        for (Index i = 0; i < encoded.rows(); ++i)
            if (is_missing(encoded(i, j))) plan.missing_rows.push_back(i);
        if (plan.missing_rows.empty()) continue;
        const auto& profile = state.data.profiles[plan.column];
        plan.kind = profile.kind;
        plan.task = profile.categorical() ? Task::classification(static_cast<int>(profile.categories.size()))
                                          : Task::regression();
        state.plans.push_back(std::move(plan));

        ColumnReport cr;
        cr.name = state.clean.column_names()[state.plans.back().column];
        cr.kind = profile.kind;
        cr.task = state.plans.back().task;
        cr.n_missing = state.plans.back().missing_rows.size();
        state.report.columns.push_back(std::move(cr));
    }

    state.search_gate = config.search_enabled &&
                        gate_search(table.rows(), static_cast<std::size_t>(encoded.cols()), state.plans.size());
    state.report.search_gate = state.search_gate;
    return state;
}

std::vector<double> impute_column(ColumnPlan& plan, ImputeState& state, const ImputeConfig& config) {
    if (plan.missing_rows.empty()) return {};
    const auto start = Clock::now();
    ColumnReport* report = nullptr;
    for (std::size_t p = 0; p < state.plans.size() && p < state.report.columns.size(); ++p)
        if (&state.plans[p] == &plan) report = &state.report.columns[p];
    const auto& name = state.clean.column_names()[plan.column];

    std::vector<Index> train_rows;
    {
        std::size_t next = 0;
        for (Index i = 0; i < state.encoded.rows(); ++i) {
            if (next < plan.missing_rows.size() && plan.missing_rows[next] == i) {
                ++next;
                continue;
            }
            train_rows.push_back(i);
        }
    }

    std::vector<double> predictions;
    if (train_rows.size() < 2) {
        state.report.warnings.push_back(fmt::format(
            "column '{}': fewer than 2 observed rows; kept the pre-imputed values", name));
        predictions = fallback_predictions(plan, state);
        write_predictions(plan, state, predictions);
        return predictions;
    }

    const Matrix features = drop_column(state.design, plan.matrix_column);
    if (state.observer) state.observer(plan, features);
    const Matrix X_train = select_rows(features, train_rows);
    const Matrix X_pred = select_rows(features, plan.missing_rows);
    std::vector<double> y;
    y.reserve(train_rows.size());
    for (Index r : train_rows) y.push_back(state.data.encoded(r, plan.matrix_column));

    // Classification trains on the classes present among the observed rows.
    std::vector<int> present;
    std::vector<int> local_labels;
    Task task = plan.task;
    if (plan.task.is_classification()) {
        std::map<int, int> local_of;
        for (double v : y) local_of.emplace(static_cast<int>(std::lround(v)), 0);
        for (auto& [code, local] : local_of) {
            local = static_cast<int>(present.size());
            present.push_back(code);
        }
        for (double v : y) local_labels.push_back(local_of[static_cast<int>(std::lround(v))]);
        task = Task::classification(static_cast<int>(present.size()));
    }

    if (plan.task.is_classification() && present.size() == 1) {
        predictions.assign(plan.missing_rows.size(), static_cast<double>(present.front()));
        if (!plan.cached_params) plan.cached_params = default_params(task, train_rows.size(), features.cols());
    } else {
        bool searched = false;
        if (!plan.cached_params) {
            if (state.search_gate) {
                std::vector<double> targets = y;
                if (task.is_classification())
                    targets.assign(local_labels.begin(), local_labels.end());
                plan.cached_params = search_params(X_train, targets, task, config.search_trials,
                                                   member_seed(config.seed, plan.column, 0) + kSearchSeedOffset);
                searched = true;
                ++state.report.searches_run;
            } else {
                plan.cached_params =
                    default_params(task, train_rows.size(), static_cast<std::size_t>(features.cols()));
            }
        }
        const BoostParams& params = *plan.cached_params;

        const auto n_pred = plan.missing_rows.size();
        std::vector<double> sums(n_pred, 0.0);
        std::vector<std::vector<int>> ballots(n_pred);
        for (int m = 0; m < config.ensemble_size; ++m) {
            const auto seed = member_seed(config.seed, plan.column, m);
            if (task.is_classification()) {
                const auto model = fit_classifier(X_train, local_labels, task.n_classes, params, seed);
                const auto pred = predict(model, X_pred);
                for (std::size_t t = 0; t < n_pred; ++t) ballots[t].push_back(pred.classes[t]);
            } else {
                const auto model = fit_regressor(X_train, y, params, seed);
                const auto pred = predict(model, X_pred);
                for (std::size_t t = 0; t < n_pred; ++t) sums[t] += pred.values(static_cast<Index>(t));
            }
        }
        state.report.models_trained += static_cast<std::size_t>(config.ensemble_size);

        predictions.resize(n_pred);
        for (std::size_t t = 0; t < n_pred; ++t) {
            predictions[t] = task.is_classification()
                                 ? static_cast<double>(present[static_cast<std::size_t>(vote(ballots[t], task.n_classes))])
                                 : sums[t] / static_cast<double>(config.ensemble_size);
        }
        if (report) {
            report->models_trained += static_cast<std::size_t>(config.ensemble_size);
            report->searched = report->searched || searched;
        }
    }

    if (report) {
        report->params = plan.cached_params;
        report->time_ms += elapsed_ms(start);
    }
    if (state.sequential_updates) write_predictions(plan, state, predictions);
    log_line(state, fmt::format("column '{}' ({}): imputed {} cells in {:.1f} ms", name, to_string(plan.task),
                                plan.missing_rows.size(), elapsed_ms(start)));
    return predictions;
}

void run_pass(ImputeState& state, const ImputeConfig& config, int pass_index) {
    const auto start = Clock::now();
    std::vector<std::vector<double>> deferred;
    for (auto& plan : state.plans) {
        auto predictions = impute_column(plan, state, config);
        if (!state.sequential_updates) deferred.push_back(std::move(predictions));
    }
    if (!state.sequential_updates)
        for (std::size_t p = 0; p < state.plans.size(); ++p) write_predictions(state.plans[p], state, deferred[p]);
    state.report.pass_ms.push_back(elapsed_ms(start));
    log_line(state, fmt::format("pass {} finished in {:.1f} ms", pass_index + 1, state.report.pass_ms.back()));
}

ImputeResult xpute(const Table& table, const ImputeConfig& config, const LogFn& log) {
    const auto start = Clock::now();
    ImputeState state = initialize(table, config);
    state.log = log;

    const auto& dir = config.output_dir;
    if (config.export_intermediates || config.save_result || config.save_plots) std::filesystem::create_directories(dir);
    if (config.export_intermediates) {
        write_csv(dir / "clean.csv", state.data.clean);
        export_matrix(dir / "encoded.csv", state.data.encoded, state);
        export_matrix(dir / "preimputed.csv", state.data.preimputed, state);
        export_matrix(dir / "design.csv", state.design, state);
    }

    const Mask missing = missing_mask(state.data.encoded);
    Matrix previous = state.data.preimputed;
    for (int pass = 0; pass < config.n_iterations; ++pass) {
        run_pass(state, config, pass);
        Matrix current = state.encoded;
        // Columns that were never planned keep their pre-imputed fill.
        for (Index j = 0; j < current.cols(); ++j)
            for (Index i = 0; i < current.rows(); ++i)
                if (is_missing(current(i, j))) current(i, j) = state.data.preimputed(i, j);
        state.report.iteration_deltas.push_back(iteration_delta(previous, current, missing));
        previous = std::move(current);
        if (config.export_intermediates)
            export_matrix(dir / fmt::format("encoded_pass_{}.csv", pass + 1), state.encoded, state);
    }

    ImputeResult result;
    result.imputed = std::move(state.clean);
    state.report.total_ms = elapsed_ms(start);
    if (config.save_result) {
        write_csv(dir / "imputed.csv", result.imputed);
        write_text(dir / "report.json", to_json(state.report));
    }
    if (config.save_plots) {
        state.clean = result.imputed;
        save_plots(state, dir);
    }
    result.report = std::move(state.report);
    return result;
}

} // namespace tabimpute
