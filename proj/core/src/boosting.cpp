#include "tabimpute/boosting.hpp"
#include "tabimpute/errors.hpp"
#include "tree_builder.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabimpute {

namespace {

constexpr std::size_t kSmallSampleLimit = 100;

detail::TreeOptions tree_options(const BoostParams& p) {
    return {p.max_depth, p.min_samples_leaf, p.l2_leaf, p.column_subsample};
}

std::vector<int> subsample_rows(std::size_t n, double fraction, Rng& rng) {
    std::vector<int> rows;
    if (fraction >= 1.0) {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), 0);
        return rows;
    }
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
    for (auto r : rng.sample_without_replacement(n, k)) rows.push_back(static_cast<int>(r));
    std::sort(rows.begin(), rows.end());
    return rows;
}

// Shifted mean: exact for constant input.
double stable_mean(std::span<const double> y) {
    const double anchor = y.front();
    double shift = 0.0;
    for (double v : y) shift += v - anchor;
    return anchor + shift / static_cast<double>(y.size());
}

void check_design(const Matrix& X, std::size_t n_targets) {
    if (X.rows() == 0 || X.cols() == 0) throw DataError("cannot fit on an empty design matrix");
    if (static_cast<std::size_t>(X.rows()) != n_targets)
        throw DataError(fmt::format("design has {} rows but {} targets were given", X.rows(), n_targets));
    if (!X.allFinite()) throw DataError("design matrix contains non-finite values");
}

} // namespace

void BoostParams::validate() const {
    auto fail = [](const char* name, const std::string& range, auto got) {
        throw ValidationError(name, fmt::format("{} must be {} (got {})", name, range, got));
    };
    if (n_trees < 1) fail("n_trees", ">= 1", n_trees);
    if (!(learning_rate > 0.0)) fail("learning_rate", "> 0", learning_rate);
    if (max_depth < 1) fail("max_depth", ">= 1", max_depth);
    if (min_samples_leaf < 1) fail("min_samples_leaf", ">= 1", min_samples_leaf);
    if (!(row_subsample > 0.0 && row_subsample <= 1.0)) fail("row_subsample", "in (0, 1]", row_subsample);
    if (!(column_subsample > 0.0 && column_subsample <= 1.0))
        fail("column_subsample", "in (0, 1]", column_subsample);
    if (!(l2_leaf >= 0.0)) fail("l2_leaf", ">= 0", l2_leaf);
}

std::string to_string(const Task& task) {
    if (task.is_classification()) return fmt::format("classification({})", task.n_classes);
    return "regression";
}

BoostParams default_params(const Task& /*task*/, std::size_t n_samples, std::size_t /*n_features*/) {
    BoostParams p;
    if (n_samples < kSmallSampleLimit) p.max_depth = 3;
    return p;
}

BoostModel fit_regressor(const Matrix& X, std::span<const double> y, const BoostParams& params, std::uint64_t seed) {
    params.validate();
    check_design(X, y.size());
    if (y.size() < 2) throw DataError("fit_regressor needs at least two rows");
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
        throw DataError("regression target contains non-finite values");

    const auto n = y.size();
    BoostModel model;
    model.task = Task::regression();
    model.params = params;
    model.seed = seed;
    model.n_features = X.cols();
    model.base_score = {stable_mean(y)};

    std::vector<double> margin(n, model.base_score[0]);
    std::vector<double> grad(n);
    const std::vector<double> hess(n, 1.0);
    detail::TreeBuilder builder(X, tree_options(params));
    Rng rng(seed);
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        const auto rows = subsample_rows(n, params.row_subsample, rng);
        for (std::size_t i = 0; i < n; ++i) grad[i] = margin[i] - y[i];
        auto tree = builder.build(grad, hess, rows, rng);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += params.learning_rate * tree.predict(X, static_cast<Index>(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

BoostModel fit_classifier(const Matrix& X, std::span<const int> y, int n_classes, const BoostParams& params,
                          std::uint64_t seed) {
    params.validate();
    check_design(X, y.size());
    if (n_classes < 2) throw DataError(fmt::format("classification needs at least 2 classes (got {})", n_classes));

    const auto n = y.size();
    const auto K = static_cast<std::size_t>(n_classes);
    std::vector<std::size_t> counts(K, 0);
    for (int label : y) {
        if (label < 0 || label >= n_classes)
            throw DataError(fmt::format("class code {} is outside [0, {})", label, n_classes));
        ++counts[static_cast<std::size_t>(label)];
    }
    std::vector<int> absent;
    for (std::size_t k = 0; k < K; ++k)
        if (counts[k] == 0) absent.push_back(static_cast<int>(k));
    if (!absent.empty()) throw DataError(fmt::format("classes absent from the labels: {}", fmt::join(absent, ", ")));

    BoostModel model;
    model.task = Task::classification(n_classes);
    model.params = params;
    model.seed = seed;
    model.n_features = X.cols();
    for (std::size_t k = 0; k < K; ++k)
        model.base_score.push_back(std::log(static_cast<double>(counts[k]) / static_cast<double>(n)));

    Matrix margin(static_cast<Index>(n), static_cast<Index>(K));
    for (std::size_t k = 0; k < K; ++k) margin.col(static_cast<Index>(k)).setConstant(model.base_score[k]);

    std::vector<double> grad(n);
    std::vector<double> hess(n);
    detail::TreeBuilder builder(X, tree_options(params));
    Rng rng(seed);
    model.trees.reserve(static_cast<std::size_t>(params.n_trees) * K);
    for (int t = 0; t < params.n_trees; ++t) {
        const auto rows = subsample_rows(n, params.row_subsample, rng);
        const Matrix prob = softmax_rows(margin);
        std::vector<DecisionTree> round;
        for (std::size_t k = 0; k < K; ++k) {
            const auto kk = static_cast<Index>(k);
            for (std::size_t i = 0; i < n; ++i) {
                const double p = prob(static_cast<Index>(i), kk);
                grad[i] = p - (y[i] == static_cast<int>(k) ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            round.push_back(builder.build(grad, hess, rows, rng));
        }
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < n; ++i)
                margin(static_cast<Index>(i), static_cast<Index>(k)) +=
                    params.learning_rate * round[k].predict(X, static_cast<Index>(i));
        for (auto& tree : round) model.trees.push_back(std::move(tree));
    }
    return model;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        double total = 0.0;
        for (Index k = 0; k < logits.cols(); ++k) {
            out(i, k) = std::exp(logits(i, k) - top);
            total += out(i, k);
        }
        out.row(i) /= total;
    }
    return out;
}

Matrix predict_margin(const BoostModel& model, const Matrix& X) {
    if (X.cols() != model.n_features)
        throw DataError(fmt::format("model expects {} features, got {}", model.n_features, X.cols()));
    const auto K = model.outputs();
    Matrix margin(X.rows(), static_cast<Index>(K));
    for (std::size_t k = 0; k < K; ++k) margin.col(static_cast<Index>(k)).setConstant(model.base_score[k]);
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto k = static_cast<Index>(t % K);
        const auto& tree = model.trees[t];
        for (Index i = 0; i < X.rows(); ++i) margin(i, k) += model.params.learning_rate * tree.predict(X, i);
    }
    return margin;
}

Prediction predict(const BoostModel& model, const Matrix& X) {
    Prediction out;
    Matrix margin = predict_margin(model, X);
    if (!model.task.is_classification()) {
        out.values = margin.col(0);
        return out;
    }
    out.probabilities = softmax_rows(margin);
    out.classes.resize(static_cast<std::size_t>(X.rows()));
    for (Index i = 0; i < X.rows(); ++i) {
        Index arg = 0;
        out.probabilities.row(i).maxCoeff(&arg); // first maximum on ties
        out.classes[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return out;
}

} // namespace tabimpute
