#include "tree_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabimpute {

double DecisionTree::predict(const Matrix& X, Index row) const { return predict_row(X.row(row)); }

int DecisionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

namespace detail {

namespace {

double midpoint(double lo, double hi) {
    const double t = lo + (hi - lo) / 2.0;
    return t < hi ? t : lo;
}

} // namespace

TreeBuilder::Split TreeBuilder::lookahead_split(std::span<const int> rows, std::span<const double> grad,
                                                std::span<const double> hess, std::span<const int> features) const {
    const std::size_t n = rows.size();
    const int msl = options_.min_samples_leaf;
    std::vector<double> g(n), h(n);
    Stats total;
    for (std::size_t k = 0; k < n; ++k) {
        g[k] = grad[static_cast<std::size_t>(rows[k])];
        h[k] = hess[static_cast<std::size_t>(rows[k])];
        total.g += g[k];
        total.h += h[k];
        ++total.n;
    }
    std::vector<std::vector<int>> order(features.size(), std::vector<int>(n));
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
        auto& o = order[fi];
        std::iota(o.begin(), o.end(), 0);
        const int f = features[fi];
        std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return X_(rows[a], f) < X_(rows[b], f); });
    }

    std::vector<char> in_left(n, 0);
    // Best single-split gain inside one side of a candidate split.
    auto side_gain = [&](char side, const Stats& side_total) {
        double best = 0.0;
        for (std::size_t fi = 0; fi < features.size(); ++fi) {
            const int f = features[fi];
            Stats acc;
            double last = 0.0;
            for (int k : order[fi]) {
                if (in_left[static_cast<std::size_t>(k)] != side) continue;
                const double x = X_(rows[static_cast<std::size_t>(k)], f);
                if (acc.n > 0 && x != last && acc.n >= msl && side_total.n - acc.n >= msl) {
                    const Stats rest{side_total.g - acc.g, side_total.h - acc.h, side_total.n - acc.n};
                    best = std::max(best, score(acc) + score(rest) - score(side_total));
                }
                acc.g += g[static_cast<std::size_t>(k)];
                acc.h += h[static_cast<std::size_t>(k)];
                ++acc.n;
                last = x;
            }
        }
        return best;
    };

    Split best;
    double best_total = 0.0;
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
        const int f = features[fi];
        const auto& o = order[fi];
        std::fill(in_left.begin(), in_left.end(), 0);
        Stats left;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto k = static_cast<std::size_t>(o[i]);
            left.g += g[k];
            left.h += h[k];
            ++left.n;
            in_left[k] = 1;
            const double x = X_(rows[k], f);
            const double next = X_(rows[static_cast<std::size_t>(o[i + 1])], f);
            if (next == x || left.n < msl || total.n - left.n < msl) continue;
            const Stats right{total.g - left.g, total.h - left.h, total.n - left.n};
            const double gain = score(left) + score(right) - score(total);
            const double below = side_gain(1, left) + side_gain(0, right);
            if (gain + below > best_total) {
                best_total = gain + below;
                best = Split{gain, f, midpoint(x, next)};
            }
        }
    }
    return best;
}

TreeBuilder::TreeBuilder(const Matrix& X, TreeOptions options)
    : X_(X), options_(options), sorted_(static_cast<std::size_t>(X.cols())),
      node_of_(static_cast<std::size_t>(X.rows()), -1) {
    for (Index f = 0; f < X.cols(); ++f) {
        auto& order = sorted_[static_cast<std::size_t>(f)];
        order.resize(static_cast<std::size_t>(X.rows()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
    }
}

DecisionTree TreeBuilder::build(std::span<const double> grad, std::span<const double> hess, std::span<const int> rows,
                                Rng& rng) {
    std::vector<DecisionTree::Node> nodes(1);
    std::vector<Stats> stats(1);

    std::fill(node_of_.begin(), node_of_.end(), -1);
    for (int r : rows) {
        node_of_[static_cast<std::size_t>(r)] = 0;
        stats[0].g += grad[static_cast<std::size_t>(r)];
        stats[0].h += hess[static_cast<std::size_t>(r)];
        ++stats[0].n;
    }
    nodes[0].n_samples = stats[0].n;

    // Per-tree column subsample, kept in ascending feature order.
    std::vector<int> features(static_cast<std::size_t>(X_.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (options_.column_subsample < 1.0 && X_.cols() > 1) {
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(options_.column_subsample * static_cast<double>(X_.cols()))));
        auto picked = rng.sample_without_replacement(features.size(), keep);
        std::sort(picked.begin(), picked.end());
        features.assign(picked.begin(), picked.end());
    }

    const int msl = options_.min_samples_leaf;
    std::vector<int> frontier{0};
    std::vector<int> slot_of(1, 0);

    struct ScanState {
        Stats left;
        double last = 0.0;
    };
    std::vector<ScanState> scan;
    std::vector<Split> best;

    for (int depth = 0; depth < options_.max_depth && !frontier.empty(); ++depth) {
        slot_of.assign(nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
        best.assign(frontier.size(), Split{});

        for (int f : features) {
            scan.assign(frontier.size(), ScanState{});
            for (int r : sorted_[static_cast<std::size_t>(f)]) {
                const int node = node_of_[static_cast<std::size_t>(r)];
                if (node < 0) continue;
                const int slot = slot_of[static_cast<std::size_t>(node)];
                if (slot < 0) continue;
                auto& st = scan[static_cast<std::size_t>(slot)];
                const double x = X_(r, f);
                const Stats& total = stats[static_cast<std::size_t>(node)];
                if (st.left.n > 0 && x != st.last && st.left.n >= msl && total.n - st.left.n >= msl) {
                    const Stats right{total.g - st.left.g, total.h - st.left.h, total.n - st.left.n};
                    const double gain = score(st.left) + score(right) - score(total);
                    auto& b = best[static_cast<std::size_t>(slot)];
                    if (gain > b.gain) b = Split{gain, f, midpoint(st.last, x)};
                }
                st.left.g += grad[static_cast<std::size_t>(r)];
                st.left.h += hess[static_cast<std::size_t>(r)];
                ++st.left.n;
                st.last = x;
            }
        }

        if (options_.max_depth - depth == 2) {
            std::vector<std::vector<int>> small(frontier.size());
            std::vector<char> wanted(frontier.size(), 0);
            bool any = false;
            for (std::size_t s = 0; s < frontier.size(); ++s) {
                const int n = stats[static_cast<std::size_t>(frontier[s])].n;
                if (n >= 2 && n <= kLookaheadMaxRows) wanted[s] = any = true;
            }
            if (any) {
                for (int r : rows) {
                    const int node = node_of_[static_cast<std::size_t>(r)];
                    if (node < 0 || static_cast<std::size_t>(node) >= slot_of.size()) continue;
                    const int slot = slot_of[static_cast<std::size_t>(node)];
                    if (slot >= 0 && wanted[static_cast<std::size_t>(slot)])
                        small[static_cast<std::size_t>(slot)].push_back(r);
                }
                for (std::size_t s = 0; s < frontier.size(); ++s)
                    if (!small[s].empty()) best[s] = lookahead_split(small[s], grad, hess, features);
            }
        }

        std::vector<int> next;
        std::vector<int> split_slot_of(nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) {
            if (best[s].feature < 0) continue;
            const int id = frontier[s];
            auto& node = nodes[static_cast<std::size_t>(id)];
            node.feature = best[s].feature;
            node.threshold = best[s].threshold;
            node.left = static_cast<int>(nodes.size());
            node.right = node.left + 1;
            const int child_depth = node.depth + 1;
            nodes.emplace_back().depth = child_depth;
            nodes.emplace_back().depth = child_depth;
            stats.resize(nodes.size());
            next.push_back(node.left);
            next.push_back(node.right);
            split_slot_of[static_cast<std::size_t>(id)] = static_cast<int>(s);
        }
        if (next.empty()) break;

        for (int r : rows) {
            auto& node_id = node_of_[static_cast<std::size_t>(r)];
            if (node_id < 0 || static_cast<std::size_t>(node_id) >= split_slot_of.size() ||
                split_slot_of[static_cast<std::size_t>(node_id)] < 0)
                continue;
            const auto& parent = nodes[static_cast<std::size_t>(node_id)];
            node_id = X_(r, parent.feature) <= parent.threshold ? parent.left : parent.right;
            auto& st = stats[static_cast<std::size_t>(node_id)];
            st.g += grad[static_cast<std::size_t>(r)];
            st.h += hess[static_cast<std::size_t>(r)];
            ++st.n;
        }
        for (int id : next) nodes[static_cast<std::size_t>(id)].n_samples = stats[static_cast<std::size_t>(id)].n;
        frontier = std::move(next);
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) continue;
        const double denom = stats[i].h + options_.l2_leaf;
        nodes[i].value = denom > 0.0 ? -stats[i].g / denom : 0.0;
    }
    return DecisionTree(std::move(nodes));
}

} // namespace detail
} // namespace tabimpute
