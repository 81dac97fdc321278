#include "tabimpute/errors.hpp"
#include "tabimpute/factorize.hpp"
#include "tabimpute/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace tabimpute;

namespace {

Matrix uniform(Rng& rng, Index n, Index m) {
    Matrix x(n, m);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return x;
}

Matrix gaussian(Rng& rng, Index n, Index m) {
    Matrix x(n, m);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    return x;
}

} // namespace

TEST(Nmf, TraceNonIncreasingAndFactorsNonNegative) {
    Rng rng(1);
    for (int t = 0; t < 5; ++t) {
        const Matrix X = uniform(rng, 30, 12);
        NmfOptions opt;
        opt.max_iter = 150;
        opt.tol = 0.0;
        opt.seed = static_cast<std::uint64_t>(t);
        const auto f = nmf(X, 4, opt);
        ASSERT_EQ(f.objective_trace.size(), 151u);
        for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
            EXPECT_LE(f.objective_trace[i], f.objective_trace[i - 1] + 1e-9);
        EXPECT_GE(f.W.minCoeff(), 0.0);
        EXPECT_GE(f.H.minCoeff(), 0.0);
        EXPECT_GE(f.reconstruct().minCoeff(), 0.0);
        EXPECT_NEAR(f.objective_trace.back(), (X - f.reconstruct()).squaredNorm(), 1e-9 * X.squaredNorm());
    }
}

TEST(Nmf, RecoversExactLowRankProduct) {
    Rng rng(7);
    const Matrix X = uniform(rng, 20, 2) * uniform(rng, 2, 10);
    NmfOptions opt;
    opt.max_iter = 2000;
    opt.tol = 0.0;
    const auto f = nmf(X, 2, opt);
    EXPECT_LE(f.objective_trace.back(), 1e-6 * X.squaredNorm());
}

TEST(Nmf, ZeroMatrix) {
    const Matrix X = Matrix::Zero(6, 4);
    const auto f = nmf(X, 2);
    EXPECT_LE(f.reconstruct().cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_GE(f.W.minCoeff(), 0.0);
}

TEST(Nmf, StopsOnTolerance) {
    Rng rng(2);
    const Matrix X = uniform(rng, 15, 8);
    NmfOptions opt;
    opt.tol = 1e-2;
    const auto f = nmf(X, 3, opt);
    EXPECT_LT(f.objective_trace.size(), static_cast<std::size_t>(opt.max_iter) + 1);
}

TEST(Nmf, RejectsBadInput) {
    Matrix X = Matrix::Ones(4, 3);
    X(1, 1) = -0.1;
    EXPECT_THROW(nmf(X, 2), DataError);
    EXPECT_THROW(nmf(Matrix::Ones(4, 3), 4), DataError);
    EXPECT_THROW(nmf(Matrix::Ones(4, 3), 0), DataError);
}

TEST(Nmf, SeededDeterminism) {
    Rng rng(3);
    const Matrix X = uniform(rng, 10, 6);
    const auto a = nmf(X, 3);
    const auto b = nmf(X, 3);
    EXPECT_EQ(a.W, b.W);
    EXPECT_EQ(a.H, b.H);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Svd, Identity) {
    const auto f = truncated_svd(Matrix::Identity(3, 3), 3);
    for (Index i = 0; i < 3; ++i) EXPECT_NEAR(f.S(i), 1.0, 1e-12);
}

TEST(Svd, RankOneExact) {
    Rng rng(4);
    const Vector u = gaussian(rng, 12, 1).col(0);
    const Vector v = gaussian(rng, 7, 1).col(0);
    const Matrix X = u * v.transpose();
    const auto f = truncated_svd(X, 1);
    EXPECT_LE((X - f.reconstruct()).norm(), 1e-8 * X.norm());
}

TEST(Svd, ReconstructionErrorIsDiscardedSpectrum) {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const Matrix X = gaussian(rng, 15, 8);
        const auto f = truncated_svd(X, 4, static_cast<std::uint64_t>(t));
        const auto s = oracle::singular_values(X);
        double discarded = 0.0;
        for (std::size_t i = 4; i < s.size(); ++i) discarded += s[i] * s[i];
        const double err = (X - f.reconstruct()).squaredNorm();
        EXPECT_NEAR(err, discarded, 1e-6 * discarded);
        for (Index i = 0; i < 4; ++i) EXPECT_NEAR(f.S(i), s[static_cast<std::size_t>(i)], 1e-8 * s[0]);
    }
}

TEST(Svd, FactorInvariants) {
    Rng rng(6);
    const Matrix X = gaussian(rng, 40, 25);
    const auto f = truncated_svd(X, 5, 1);
    EXPECT_LE((f.U.transpose() * f.U - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((f.V.transpose() * f.V - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (Index i = 1; i < 5; ++i) EXPECT_GE(f.S(i - 1), f.S(i));
    EXPECT_GE(f.S.minCoeff(), 0.0);
}

TEST(Svd, BeatsRandomRankRCompetitors) {
    Rng rng(8);
    const Matrix X = gaussian(rng, 30, 20);
    const double err = (X - truncated_svd(X, 3, 0).reconstruct()).squaredNorm();
    for (int c = 0; c < 20; ++c) {
        const Matrix A = gaussian(rng, 30, 3);
        const Matrix B = gaussian(rng, 3, 20);
        // Best scaling of the competitor, to make it as strong as possible.
        const Matrix P = A * B;
        const double alpha = (P.cwiseProduct(X)).sum() / P.squaredNorm();
        EXPECT_LE(err, (X - alpha * P).squaredNorm());
    }
}

TEST(Svd, RankRange) {
    EXPECT_THROW(truncated_svd(Matrix::Ones(4, 3), 0), DataError);
    EXPECT_THROW(truncated_svd(Matrix::Ones(4, 3), 4), DataError);
}

TEST(ChooseRank, Examples) {
    Rng rng(9);
    const Matrix r1 = gaussian(rng, 10, 1) * gaussian(rng, 1, 6);
    EXPECT_EQ(choose_rank(r1), 2);
    EXPECT_EQ(choose_rank(Matrix::Identity(10, 10)), 9);
    EXPECT_LE(choose_rank(gaussian(rng, 3, 3)), 3);
    EXPECT_LE(choose_rank(gaussian(rng, 200, 120)), 50);
}

TEST(ChooseRank, MatchesEnergyOracle) {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const Matrix X = gaussian(rng, 25, 12);
        const auto s = oracle::singular_values(X);
        double total = 0.0;
        for (double v : s) total += v * v;
        int r = 0;
        double acc = 0.0;
        while (acc < 0.9 * total) acc += s[static_cast<std::size_t>(r)] * s[static_cast<std::size_t>(r)], ++r;
        EXPECT_EQ(choose_rank(X), std::clamp(r, 2, 12));
    }
}

TEST(AdaptiveFactorize, PicksMethodBySign) {
    Rng rng(11);
    Matrix pre = uniform(rng, 12, 5);
    Matrix enc = pre;
    enc(3, 2) = kMissing;
    enc(7, 0) = kMissing;
    auto check = [&](const FactorizationOutput& out) {
        for (Index i = 0; i < pre.rows(); ++i)
            for (Index j = 0; j < pre.cols(); ++j) {
                if (std::isnan(enc(i, j)))
                    EXPECT_EQ(out.nan_replaced(i, j), out.fully_transformed(i, j));
                else
                    EXPECT_EQ(out.nan_replaced(i, j), pre(i, j));
            }
        EXPECT_EQ(out.rank, choose_rank(pre));
    };
    const auto a = adaptive_factorize(enc, pre);
    EXPECT_EQ(a.method, FactorizationMethod::NMF);
    check(a);

    pre(0, 0) = -0.5;
    enc(0, 0) = -0.5;
    const auto b = adaptive_factorize(enc, pre);
    EXPECT_EQ(b.method, FactorizationMethod::SVD);
    check(b);
}

TEST(AdaptiveFactorize, FullyObservedKeepsPreimputed) {
    Rng rng(12);
    const Matrix pre = uniform(rng, 10, 4);
    EXPECT_EQ(adaptive_factorize(pre, pre).nan_replaced, pre);
}

TEST(AdaptiveFactorize, ShapeMismatch) {
    EXPECT_THROW(adaptive_factorize(Matrix::Ones(3, 3), Matrix::Ones(3, 2)), DataError);
}
