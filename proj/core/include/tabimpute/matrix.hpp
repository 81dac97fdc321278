#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace tabimpute {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numeric matrices mark missing entries with a quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// True where `m` holds NaN.
inline Mask missing_mask(const Matrix& m) { return m.array().isNaN(); }

inline Index count_missing(const Matrix& m) {
    return m.unaryExpr([](double v) { return is_missing(v) ? 1.0 : 0.0; }).sum();
}

/// Copy of `m` without column `col`.
inline Matrix drop_column(const Matrix& m, Index col) {
    Matrix out(m.rows(), m.cols() - 1);
    if (col > 0) out.leftCols(col) = m.leftCols(col);
    if (col + 1 < m.cols()) out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
    return out;
}

inline Matrix select_rows(const Matrix& m, std::span<const Index> rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

} // namespace tabimpute
