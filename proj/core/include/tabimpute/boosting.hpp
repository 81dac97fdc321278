#pragma once

#include "tabimpute/matrix.hpp"
#include "tabimpute/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tabimpute {

struct BoostParams {
    int n_trees = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    int min_samples_leaf = 1;
    double row_subsample = 0.7;
    double column_subsample = 1.0;
    double l2_leaf = 1.0;

    /// Throws ValidationError for values outside their documented ranges.
    void validate() const;

    friend bool operator==(const BoostParams&, const BoostParams&) = default;
};

struct Task {
    enum class Kind { Regression, Classification };

    Kind kind = Kind::Regression;
    int n_classes = 0; // K for classification

    static Task regression() { return {Kind::Regression, 0}; }
    static Task classification(int k) { return {Kind::Classification, k}; }

    bool is_classification() const noexcept { return kind == Kind::Classification; }

    friend bool operator==(const Task&, const Task&) = default;
};

std::string to_string(const Task& task);

/// Binary regression tree on dense features. Rows with x <= threshold go
/// left. Leaves hold one scalar; classification uses one tree per class.
class DecisionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0; // leaf output
        int n_samples = 0;
        int depth = 0;

        bool is_leaf() const noexcept { return feature < 0; }
    };

    DecisionTree() = default;
    explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    double predict(const Matrix& X, Index row) const;
    template <typename RowVector>
    double predict_row(const RowVector& x) const {
        int i = 0;
        while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes_[static_cast<std::size_t>(i)];
            i = x(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(i)].value;
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int depth() const;
    std::size_t leaf_count() const;

private:
    std::vector<Node> nodes_;
};

struct BoostModel {
    Task task;
    std::vector<double> base_score; // size 1 (regression) or K
    /// Round-major; classification stores K trees per round, class k of
    /// round t at index t*K + k.
    std::vector<DecisionTree> trees;
    BoostParams params;
    std::uint64_t seed = 0;
    Index n_features = 0;

    std::size_t outputs() const noexcept { return base_score.size(); }
};

/// Output of predict(): `values` for regression; `probabilities` (rows sum
/// to one) and argmax `classes` for classification.
struct Prediction {
    Vector values;
    Matrix probabilities;
    std::vector<int> classes;
};

/// Defaults mirror a common gradient-boosting library's out-of-box
/// settings, with 70% row subsampling and depth 3 under 100 samples.
BoostParams default_params(const Task& task, std::size_t n_samples, std::size_t n_features);

/// Squared-error boosting from the mean of y.
BoostModel fit_regressor(const Matrix& X, std::span<const double> y, const BoostParams& params,
                         std::uint64_t seed);

/// Softmax boosting with one tree per class per round, starting from the
/// log class priors. Labels must cover every class in [0, K).
BoostModel fit_classifier(const Matrix& X, std::span<const int> y, int n_classes, const BoostParams& params,
                          std::uint64_t seed);

Prediction predict(const BoostModel& model, const Matrix& X);

/// Raw additive scores (before softmax for classification), n x outputs.
Matrix predict_margin(const BoostModel& model, const Matrix& X);

/// Stable row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

struct SearchTrial {
    BoostParams params;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    double objective = 0.0; // validation + max(0, validation - train)
};

struct SearchResult {
    std::vector<SearchTrial> trials;
    std::size_t best = 0;

    const BoostParams& best_params() const { return trials.at(best).params; }
};

inline constexpr int kMinSearchTrials = 5;
inline constexpr int kMaxSearchTrials = 50;

/// Index of the smallest objective; ties go to the earliest trial.
std::size_t select_best_trial(std::span<const double> objectives);

/// Draws one candidate from the search space.
BoostParams sample_params(Rng& rng);

/// Seeded random search over the boosting space, scored on an 80/20 split
/// (stratified for classification) with an overfit penalty. `y` holds
/// targets for regression and class codes 0..K-1 for classification.
SearchResult run_search(const Matrix& X, std::span<const double> y, const Task& task, int n_trials,
                        std::uint64_t seed);

BoostParams search_params(const Matrix& X, std::span<const double> y, const Task& task, int n_trials,
                          std::uint64_t seed);

} // namespace tabimpute
