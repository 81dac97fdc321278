#pragma once

#include "tabimpute/boosting.hpp"
#include "tabimpute/random.hpp"

#include <span>
#include <vector>

namespace tabimpute::detail {

// Nodes this small with exactly two levels left choose their split by an
// exhaustive two-level search, so their final subtree has the least loss.
inline constexpr int kLookaheadMaxRows = 8;

struct TreeOptions {
    int max_depth = 6;
    int min_samples_leaf = 1;
    double l2_leaf = 1.0;
    double column_subsample = 1.0;
};

// Exact greedy, level-wise tree growth on first/second-order gradient
// statistics. Feature orders are sorted once per model and reused by every
// tree; rows outside the current subsample are skipped during scans.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, TreeOptions options);

    DecisionTree build(std::span<const double> grad, std::span<const double> hess, std::span<const int> rows,
                       Rng& rng);

private:
    struct Stats {
        double g = 0.0;
        double h = 0.0;
        int n = 0;
    };

    struct Split {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    double score(const Stats& s) const { return s.g * s.g / (s.h + options_.l2_leaf); }

    // Split maximising its own gain plus the best gains of both children.
    Split lookahead_split(std::span<const int> rows, std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> features) const;

    const Matrix& X_;
    TreeOptions options_;
    std::vector<std::vector<int>> sorted_; // per feature, rows by ascending value
    std::vector<int> node_of_;
};

} // namespace tabimpute::detail
