#include "tabimpute/factorize.hpp"
#include "tabimpute/errors.hpp"
#include "tabimpute/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tabimpute {

namespace {

constexpr int kOversample = 10;
constexpr int kPowerIterations = 4;
constexpr double kEnergyShare = 0.9;
constexpr int kMaxRank = 50;

void check_rank(const Matrix& X, int rank) {
    const auto limit = std::min(X.rows(), X.cols());
    if (rank < 1 || rank > limit)
        throw DataError(fmt::format("rank {} is outside [1, {}] for a {}x{} matrix", rank, limit, X.rows(), X.cols()));
}

Matrix orthonormal_basis(const Matrix& Y) {
    Eigen::HouseholderQR<Matrix> qr(Y);
    return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

} // namespace

NmfFactors nmf(const Matrix& X, int rank, const NmfOptions& options) {
    check_rank(X, rank);
    if (X.size() > 0 && X.minCoeff() < 0.0) throw DataError("nmf requires a non-negative matrix");

    const Index n = X.rows();
    const Index m = X.cols();
    const Index r = rank;
    const double scale = std::sqrt(X.mean() / static_cast<double>(r));

    Rng rng(options.seed);
    NmfFactors f;
    f.W.resize(n, r);
    f.H.resize(r, m);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < r; ++k) f.W(i, k) = rng.uniform() * scale;
    for (Index k = 0; k < r; ++k)
        for (Index j = 0; j < m; ++j) f.H(k, j) = rng.uniform() * scale;

    auto objective = [&] { return (X - f.W * f.H).squaredNorm(); };
    f.objective_trace.push_back(objective());

    for (int it = 0; it < options.max_iter; ++it) {
        const double before = f.objective_trace.back();
        if (before == 0.0) break;

        const Matrix WtX = f.W.transpose() * X;
        const Matrix WtWH = (f.W.transpose() * f.W) * f.H;
        f.H = f.H.cwiseProduct(WtX.cwiseQuotient((WtWH.array() + kNmfEpsilon).matrix()));

        const Matrix XHt = X * f.H.transpose();
        const Matrix WHHt = f.W * (f.H * f.H.transpose());
        f.W = f.W.cwiseProduct(XHt.cwiseQuotient((WHHt.array() + kNmfEpsilon).matrix()));

        const double after = objective();
        f.objective_trace.push_back(after);
        if ((before - after) / before < options.tol) break;
    }
    return f;
}

SvdFactors truncated_svd(const Matrix& X, int rank, std::uint64_t seed) {
    check_rank(X, rank);
    const Index n = X.rows();
    const Index m = X.cols();
    const Index width = std::min<Index>(rank + kOversample, std::min(n, m));

    Rng rng(seed);
    Matrix omega(m, width);
    for (Index j = 0; j < width; ++j)
        for (Index i = 0; i < m; ++i) omega(i, j) = rng.normal();

    Matrix Q = orthonormal_basis(X * omega);
    for (int p = 0; p < kPowerIterations; ++p) {
        const Matrix Z = orthonormal_basis(X.transpose() * Q);
        Q = orthonormal_basis(X * Z);
    }

    const Matrix B = Q.transpose() * X; // width x m
    Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdFactors f;
    f.U = Q * svd.matrixU().leftCols(rank);
    f.S = svd.singularValues().head(rank);
    f.V = svd.matrixV().leftCols(rank);
    return f;
}

int choose_rank(const Matrix& X) {
    const Index limit = std::min<Index>({X.rows(), X.cols(), kMaxRank});
    const Index floor = std::min<Index>(2, limit);
    if (X.size() == 0) return static_cast<int>(floor);

    const Vector s = Eigen::BDCSVD<Matrix>(X).singularValues();
    const double total = s.squaredNorm();
    Index r = s.size();
    if (total > 0.0) {
        double cumulative = 0.0;
        for (Index i = 0; i < s.size(); ++i) {
            cumulative += s(i) * s(i);
            // Relative slack absorbs rounding in equal-energy spectra.
            if (cumulative >= kEnergyShare * total * (1.0 - 1e-12)) {
                r = i + 1;
                break;
            }
        }
    }
    return static_cast<int>(std::clamp(r, floor, limit));
}

std::string_view to_string(FactorizationMethod method) {
    return method == FactorizationMethod::NMF ? "NMF" : "SVD";
}

FactorizationOutput adaptive_factorize(const Matrix& encoded, const Matrix& preimputed, const NmfOptions& options) {
    if (encoded.rows() != preimputed.rows() || encoded.cols() != preimputed.cols())
        throw DataError(fmt::format("encoded is {}x{} but preimputed is {}x{}", encoded.rows(), encoded.cols(),
                                    preimputed.rows(), preimputed.cols()));
    if (preimputed.array().isNaN().any()) throw DataError("the pre-imputed matrix must be dense");

    FactorizationOutput out;
    out.rank = choose_rank(preimputed);
    if (preimputed.minCoeff() >= 0.0) {
        out.method = FactorizationMethod::NMF;
        out.fully_transformed = nmf(preimputed, out.rank, options).reconstruct();
    } else {
        out.method = FactorizationMethod::SVD;
        out.fully_transformed = truncated_svd(preimputed, out.rank, options.seed).reconstruct();
    }
    out.nan_replaced = preimputed;
    for (Index j = 0; j < encoded.cols(); ++j)
        for (Index i = 0; i < encoded.rows(); ++i)
            if (is_missing(encoded(i, j))) out.nan_replaced(i, j) = out.fully_transformed(i, j);
    return out;
}

} // namespace tabimpute
