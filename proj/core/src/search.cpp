#include "tabimpute/boosting.hpp"
#include "tabimpute/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace tabimpute {

namespace {

constexpr double kValidationShare = 0.2;
constexpr double kProbabilityFloor = 1e-15;
constexpr std::array<int, 4> kLeafSizes = {1, 5, 10, 20};

struct Split {
    std::vector<Index> train;
    std::vector<Index> validation;
};

Split random_split(std::size_t n, Rng& rng) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(std::floor(kValidationShare * static_cast<double>(n)));
    n_val = std::min(n_val, n - 1);
    Split s;
    s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    return s;
}

// Every class keeps at least one training row.
Split stratified_split(std::span<const int> labels, int n_classes, Rng& rng) {
    Split s;
    for (int k = 0; k < n_classes; ++k) {
        std::vector<Index> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == k) members.push_back(static_cast<Index>(i));
        rng.shuffle(members);
        const auto n_val = static_cast<std::size_t>(std::floor(kValidationShare * static_cast<double>(members.size())));
        s.validation.insert(s.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
        s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    return s;
}

double mse(const BoostModel& model, const Matrix& X, std::span<const double> y) {
    const Vector pred = predict(model, X).values;
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = pred(static_cast<Index>(i)) - y[i];
        total += d * d;
    }
    return total / static_cast<double>(y.size());
}

double log_loss(const BoostModel& model, const Matrix& X, std::span<const int> y) {
    const Matrix prob = predict(model, X).probabilities;
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        total -= std::log(std::max(prob(static_cast<Index>(i), y[i]), kProbabilityFloor));
    return total / static_cast<double>(y.size());
}

template <typename T>
std::vector<T> pick(std::span<const T> values, std::span<const Index> rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(values[static_cast<std::size_t>(r)]);
    return out;
}

} // namespace

std::size_t select_best_trial(std::span<const double> objectives) {
    if (objectives.empty()) throw DataError("no trials to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < objectives.size(); ++i)
        if (objectives[i] < objectives[best]) best = i;
    return best;
}

BoostParams sample_params(Rng& rng) {
    BoostParams p;
    p.learning_rate = rng.log_uniform(0.01, 0.3);
    p.max_depth = rng.integer(2, 8);
    p.n_trees = rng.integer(50, 300);
    p.min_samples_leaf = kLeafSizes[rng.below(kLeafSizes.size())];
    p.l2_leaf = rng.log_uniform(0.1, 10.0);
    p.row_subsample = 0.7;
    p.column_subsample = 1.0;
    return p;
}

SearchResult run_search(const Matrix& X, std::span<const double> y, const Task& task, int n_trials,
                        std::uint64_t seed) {
    if (n_trials < kMinSearchTrials || n_trials > kMaxSearchTrials)
        throw ValidationError("search_trials", fmt::format("search_trials must be between {} and {} (got {})",
                                                           kMinSearchTrials, kMaxSearchTrials, n_trials));
    if (static_cast<std::size_t>(X.rows()) != y.size() || y.size() < 2)
        throw DataError("search needs a design with at least two rows matching the targets");

    Rng rng(seed);
    std::vector<int> labels;
    if (task.is_classification()) {
        labels.reserve(y.size());
        for (double v : y) labels.push_back(static_cast<int>(std::lround(v)));
    }
    Split split = task.is_classification() ? stratified_split(labels, task.n_classes, rng) : random_split(y.size(), rng);
    if (split.validation.empty()) split.validation = split.train;

    const Matrix X_train = select_rows(X, split.train);
    const Matrix X_val = select_rows(X, split.validation);

    SearchResult result;
    std::vector<double> objectives;
    for (int t = 0; t < n_trials; ++t) {
        SearchTrial trial;
        trial.params = sample_params(rng);
        const auto fit_seed = seed + static_cast<std::uint64_t>(t) + 1;
        if (task.is_classification()) {
            const auto y_train = pick<int>(labels, split.train);
            const auto y_val = pick<int>(labels, split.validation);
            const auto model = fit_classifier(X_train, y_train, task.n_classes, trial.params, fit_seed);
            trial.train_loss = log_loss(model, X_train, y_train);
            trial.validation_loss = log_loss(model, X_val, y_val);
        } else {
            const auto y_train = pick<double>(y, split.train);
            const auto y_val = pick<double>(y, split.validation);
            const auto model = fit_regressor(X_train, y_train, trial.params, fit_seed);
            trial.train_loss = mse(model, X_train, y_train);
            trial.validation_loss = mse(model, X_val, y_val);
        }
        trial.objective = trial.validation_loss + std::max(0.0, trial.validation_loss - trial.train_loss);
        objectives.push_back(trial.objective);
        result.trials.push_back(trial);
    }
    result.best = select_best_trial(objectives);
    return result;
}

BoostParams search_params(const Matrix& X, std::span<const double> y, const Task& task, int n_trials,
                          std::uint64_t seed) {
    return run_search(X, y, task, n_trials, seed).best_params();
}

} // namespace tabimpute
