#include "tabimpute/errors.hpp"
#include "tabimpute/preprocess.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tabimpute {

std::optional<double> nan_euclidean(const Matrix& m, Index a, Index b) {
    double sum = 0.0;
    Index shared = 0;
    for (Index c = 0; c < m.cols(); ++c) {
        const double x = m(a, c);
        const double y = m(b, c);
        if (is_missing(x) || is_missing(y)) continue;
        const double d = x - y;
        sum += d * d;
        ++shared;
    }
    if (shared == 0) return std::nullopt;
    return std::sqrt(static_cast<double>(m.cols()) / static_cast<double>(shared) * sum);
}

Matrix knn_impute_columns(const Matrix& m, int k, const std::vector<bool>& columns,
                          std::vector<std::string>* warnings) {
    if (k < 1) throw ValidationError("knn_k", fmt::format("knn_k must be positive (got {})", k));
    if (static_cast<Index>(columns.size()) != m.cols()) throw DataError("knn_impute: column mask has the wrong size");

    const Index n = m.rows();
    Matrix out = m;

    std::vector<double> fallback(static_cast<std::size_t>(m.cols()), kMissing);
    for (Index j = 0; j < m.cols(); ++j) {
        double sum = 0.0;
        Index count = 0;
        for (Index i = 0; i < n; ++i) {
            if (!is_missing(m(i, j))) {
                sum += m(i, j);
                ++count;
            }
        }
        if (count > 0) fallback[static_cast<std::size_t>(j)] = sum / static_cast<double>(count);
    }

    std::vector<std::optional<double>> dist(static_cast<std::size_t>(n));
    std::vector<std::pair<double, Index>> candidates;
    for (Index i = 0; i < n; ++i) {
        bool needs_fill = false;
        for (Index j = 0; j < m.cols() && !needs_fill; ++j)
            needs_fill = columns[static_cast<std::size_t>(j)] && is_missing(m(i, j));
        if (!needs_fill) continue;

        for (Index b = 0; b < n; ++b) dist[static_cast<std::size_t>(b)] = b == i ? std::nullopt : nan_euclidean(m, i, b);

        for (Index j = 0; j < m.cols(); ++j) {
            if (!columns[static_cast<std::size_t>(j)] || !is_missing(m(i, j))) continue;
            candidates.clear();
            for (Index b = 0; b < n; ++b) {
                const auto& d = dist[static_cast<std::size_t>(b)];
                if (d && !is_missing(m(b, j))) candidates.emplace_back(*d, b);
            }
            if (candidates.empty()) {
                if (is_missing(fallback[static_cast<std::size_t>(j)]))
                    throw DataError(fmt::format("column {} has no observed values to impute from", j));
                out(i, j) = fallback[static_cast<std::size_t>(j)];
                if (warnings)
                    warnings->push_back(fmt::format(
                        "knn: no eligible neighbour for row {} column {}; used the column mean", i, j));
                continue;
            }
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
            std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                              candidates.end());
            double sum = 0.0;
            for (std::size_t t = 0; t < take; ++t) sum += m(candidates[t].second, j);
            out(i, j) = sum / static_cast<double>(take);
        }
    }
    return out;
}

Matrix knn_impute(const Matrix& m, int k, std::vector<std::string>* warnings) {
    return knn_impute_columns(m, k, std::vector<bool>(static_cast<std::size_t>(m.cols()), true), warnings);
}

} // namespace tabimpute
