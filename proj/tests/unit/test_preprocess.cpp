#include "tabimpute/errors.hpp"
#include "tabimpute/preprocess.hpp"
#include "tabimpute/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tabimpute;

namespace {

const double NaN = kMissing;

Cell N(double v) { return Cell::number(v); }
Cell T(std::string s) { return Cell::text(std::move(s)); }
Cell M() { return Cell::missing(); }

ColumnProfile continuous() {
    ColumnProfile p;
    p.kind = ColumnKind::Continuous;
    return p;
}

ColumnProfile categorical(int k) {
    ColumnProfile p;
    p.kind = k == 2 ? ColumnKind::Boolean : ColumnKind::Categorical;
    for (int i = 0; i < k; ++i) p.categories.push_back("c" + std::to_string(i));
    return p;
}

Matrix random_with_missing(Rng& rng, Index rows, Index cols, double frac) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform() < frac ? NaN : std::round(rng.normal() * 8.0) / 4.0;
    // Keep one observed value per column and per row.
    for (Index j = 0; j < cols; ++j)
        if (m.col(j).array().isNaN().all()) m(0, j) = 1.0;
    for (Index i = 0; i < rows; ++i)
        if (m.row(i).array().isNaN().all()) m(i, 0) = 0.5;
    return m;
}

bool same(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i], y = b.data()[i];
        if (std::isnan(x) != std::isnan(y)) return false;
        if (!std::isnan(x) && x != y) return false;
    }
    return true;
}

Table single_column(std::vector<Cell> c, std::string name = "F") {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < c.size(); ++i) ids.push_back("r" + std::to_string(i));
    return Table("id", ids, {std::move(name)}, std::move(c));
}

} // namespace

TEST(MissingTokens, NormalizesExactTokensOnly) {
    EXPECT_EQ(missing_tokens().size(), 10u);
    std::vector<Cell> c;
    for (auto tok : missing_tokens()) c.push_back(T(std::string(tok)));
    c.push_back(T("  #DIV/0!  "));
    c.push_back(T("banana"));
    c.push_back(T("nan-ish"));
    c.push_back(T("NONE"));
    c.push_back(N(1.0));
    const auto out = normalize_missing_tokens(single_column(c));
    for (std::size_t i = 0; i < 11; ++i) EXPECT_TRUE(out.at(i, 0).is_missing()) << i;
    EXPECT_EQ(out.at(11, 0), T("banana"));
    EXPECT_EQ(out.at(12, 0), T("nan-ish"));
    EXPECT_EQ(out.at(13, 0), T("NONE"));
    EXPECT_EQ(out.at(14, 0), N(1.0));
}

TEST(ZerosToMissing, StrictEquality) {
    const auto out = zeros_to_missing(single_column({N(0.0), N(-0.0), N(0.0001), T("0.0x")}));
    EXPECT_TRUE(out.at(0, 0).is_missing());
    EXPECT_TRUE(out.at(1, 0).is_missing());
    EXPECT_EQ(out.at(2, 0), N(0.0001));
    EXPECT_EQ(out.at(3, 0), T("0.0x"));
}

TEST(ZerosToMissing, ParsedTextZero) {
    const auto parsed = parse_csv("id,F\nr1,0\n");
    EXPECT_TRUE(zeros_to_missing(parsed).at(0, 0).is_missing());
}

TEST(ClassifyColumns, CoercesMinorityType) {
    std::vector<Cell> cont{N(1), N(2), N(3), N(4), N(5), N(6), N(7), T("a"), T("b"), T("c")};
    std::vector<Cell> cat{T("x"), T("y"), T("z"), T("x"), T("y"), T("z"), T("x"), N(1), N(2), N(3)};
    std::vector<Cell> mixed{N(1), N(2), N(3), N(4), N(5), N(6), T("a"), T("b"), T("c"), T("d")};
    std::vector<Cell> body;
    for (std::size_t i = 0; i < 10; ++i) {
        body.push_back(cont[i]);
        body.push_back(cat[i]);
        body.push_back(mixed[i]);
    }
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("r" + std::to_string(i));
    const Table t("id", ids, {"cont", "cat", "mixed"}, body);
    const auto [clean, profiles] = classify_columns(t);
    EXPECT_EQ(profiles[0].kind, ColumnKind::Continuous);
    EXPECT_EQ(profiles[1].kind, ColumnKind::Categorical);
    EXPECT_EQ(profiles[2].kind, ColumnKind::Excluded);
    for (std::size_t i = 7; i < 10; ++i) {
        EXPECT_TRUE(clean.at(i, 0).is_missing());
        EXPECT_TRUE(clean.at(i, 1).is_missing());
        EXPECT_EQ(clean.at(i, 2), t.at(i, 2));
    }
    EXPECT_EQ(profiles[1].categories, (std::vector<std::string>{"x", "y", "z"}));

    const auto [again, profiles2] = classify_columns(clean);
    EXPECT_EQ(again, clean);
    EXPECT_EQ(profiles2, profiles);
}

TEST(ClassifyColumns, IdempotentOnRandomTables) {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Cell> body;
        const std::size_t rows = 5 + rng.below(10), cols = 1 + rng.below(4);
        for (std::size_t i = 0; i < rows * cols; ++i) {
            const auto u = rng.below(3);
            body.push_back(u == 0 ? N(rng.normal()) : u == 1 ? T(rng.below(2) ? "p" : "q") : M());
        }
        std::vector<std::string> ids, names;
        for (std::size_t r = 0; r < rows; ++r) ids.push_back(std::to_string(r));
        for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
        const auto first = classify_columns(Table("id", ids, names, body));
        const auto second = classify_columns(first.first);
        EXPECT_EQ(first.first, second.first);
        EXPECT_EQ(first.second, second.second);
    }
}

TEST(PreImpute, ColumnMeanExamples) {
    Matrix m(4, 1);
    m << 1, 2, NaN, 3;
    const std::vector<ColumnProfile> cont{continuous()};
    const auto out = pre_impute(m, cont, PreImputeStrategy::column_mean());
    EXPECT_EQ(out(2, 0), 2.0);

    Matrix c(4, 1);
    c << 0, 0, 1, NaN;
    const std::vector<ColumnProfile> cat{categorical(2)};
    EXPECT_EQ(pre_impute(c, cat, PreImputeStrategy::column_mean())(3, 0), 0.0);

    Matrix tie(3, 1);
    tie << 1, 0, NaN;
    EXPECT_EQ(pre_impute(tie, cat, PreImputeStrategy::column_mean())(2, 0), 0.0);
}

TEST(PreImpute, ColumnMeanMatchesOracle) {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m = random_with_missing(rng, 25, 5, 0.2);
        for (Index i = 0; i < 25; ++i)
            if (!std::isnan(m(i, 4))) m(i, 4) = static_cast<double>(rng.below(3));
        std::vector<ColumnProfile> profiles(4, continuous());
        profiles.push_back(categorical(3));
        const auto out = pre_impute(m, profiles, PreImputeStrategy::column_mean());
        for (Index i = 0; i < 25; ++i)
            for (Index j = 0; j < 5; ++j) {
                if (!std::isnan(m(i, j))) {
                    EXPECT_EQ(out(i, j), m(i, j));
                } else {
                    const double want = j < 4 ? oracle::column_mean(m, static_cast<int>(j))
                                              : oracle::column_mode(m, static_cast<int>(j));
                    EXPECT_EQ(out(i, j), want);
                }
            }
    }
}

TEST(PreImpute, ColumnWithoutObservationsIsNamed) {
    Matrix m(3, 2);
    m << 1, NaN, 2, NaN, 3, NaN;
    const std::vector<ColumnProfile> p{continuous(), continuous()};
    try {
        pre_impute(m, p, PreImputeStrategy::column_mean());
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(KnnImpute, HandExamples) {
    Matrix m(3, 2);
    m << 1, 1, 1, NaN, 9, 9;
    EXPECT_EQ(knn_impute(m, 1)(1, 1), 1.0);

    Matrix eq(3, 2);
    eq << 0, 2, 0, 4, 0, NaN;
    EXPECT_EQ(knn_impute(eq, 2)(2, 1), 3.0);

    Matrix full = Matrix::Random(5, 3);
    EXPECT_EQ(knn_impute(full, 2), full);
}

TEST(KnnImpute, DistanceMatchesOracle) {
    Rng rng(2);
    const Matrix m = random_with_missing(rng, 12, 4, 0.3);
    for (Index a = 0; a < 12; ++a)
        for (Index b = 0; b < 12; ++b) {
            const auto d = nan_euclidean(m, a, b);
            const double o = oracle::nan_distance(m, static_cast<int>(a), static_cast<int>(b));
            if (o < 0) {
                EXPECT_FALSE(d.has_value());
            } else {
                ASSERT_TRUE(d.has_value());
                EXPECT_DOUBLE_EQ(*d, o);
            }
        }
}

TEST(KnnImpute, MatchesBruteForceOracle) {
    Rng rng(1234);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix m = random_with_missing(rng, 20, 6, 0.15);
        for (int k : {1, 3, 5}) {
            const Matrix got = knn_impute(m, k);
            const Matrix want = oracle::knn_fill(m, k);
            EXPECT_TRUE(same(got, want)) << "trial " << trial << " k " << k;
        }
    }
}

TEST(KnnImpute, LargeKIsColumnMean) {
    Rng rng(3);
    Matrix m(10, 3);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    m(2, 1) = NaN;
    m(7, 1) = NaN;
    const Matrix out = knn_impute(m, 9);
    EXPECT_NEAR(out(2, 1), oracle::column_mean(m, 1), 1e-12);
    EXPECT_NEAR(out(7, 1), oracle::column_mean(m, 1), 1e-12);
}

TEST(KnnImpute, NoEligibleNeighbourFallsBackWithWarning) {
    Matrix m(3, 2);
    m << 1, NaN, NaN, 5, NaN, 7;
    std::vector<std::string> warnings;
    const Matrix out = knn_impute(m, 1, &warnings);
    EXPECT_EQ(out(0, 1), 6.0);
    EXPECT_FALSE(warnings.empty());
}

TEST(PreImpute, MixTypeAgreesWithColumnMeanOnContinuous) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix m = random_with_missing(rng, 30, 4, 0.2);
        for (Index i = 0; i < 30; ++i)
            if (!std::isnan(m(i, 3))) m(i, 3) = static_cast<double>(rng.below(2));
        if (m.col(3).array().isNaN().all()) m(0, 3) = 1.0;
        std::vector<ColumnProfile> p(3, continuous());
        p.push_back(categorical(2));
        const Matrix mean = pre_impute(m, p, PreImputeStrategy::column_mean());
        const Matrix mix = pre_impute(m, p, PreImputeStrategy::mix_type(3));
        EXPECT_EQ(mean.leftCols(3), mix.leftCols(3));
        // Categorical column follows KNN on the original missingness.
        const Matrix knn = oracle::knn_fill(m, 3);
        for (Index i = 0; i < 30; ++i) EXPECT_EQ(mix(i, 3), knn(i, 3));
    }
}

TEST(PreImpute, ObservedEntriesNeverChange) {
    Rng rng(6);
    for (auto strategy : {PreImputeStrategy::column_mean(), PreImputeStrategy::knn(4), PreImputeStrategy::mix_type(2)}) {
        const Matrix m = random_with_missing(rng, 15, 4, 0.3);
        std::vector<ColumnProfile> p(4, continuous());
        const Matrix out = pre_impute(m, p, strategy);
        EXPECT_FALSE(out.array().isNaN().any());
        for (Index i = 0; i < m.size(); ++i)
            if (!std::isnan(m.data()[i])) EXPECT_EQ(out.data()[i], m.data()[i]);
    }
}

TEST(Strategy, ValidateRange) {
    EXPECT_NO_THROW(PreImputeStrategy::knn(4).validate(5));
    EXPECT_THROW(PreImputeStrategy::knn(5).validate(5), ValidationError);
    EXPECT_THROW(PreImputeStrategy::mix_type(0).validate(5), ValidationError);
    EXPECT_NO_THROW((PreImputeStrategy{PreImputeStrategy::Kind::ColumnMean, 0}.validate(5)));
    EXPECT_EQ(parse_strategy_kind("KNNImputer"), PreImputeStrategy::Kind::Knn);
    EXPECT_EQ(parse_strategy_kind("mixtype"), PreImputeStrategy::Kind::MixType);
    EXPECT_FALSE(parse_strategy_kind("median").has_value());
}

TEST(PreprocessingDf, FullyObservedMixedTable) {
    const auto t = parse_csv("id,a,b,c\nr1,1,x,u\nr2,2,y,v\nr3,3,x,w\nr4,4,y,u\n");
    const auto tri = preprocessing_df(t, false, PreImputeStrategy::mix_type(2));
    EXPECT_EQ(tri.encoded, tri.preimputed);
    EXPECT_EQ(tri.encoded.cols(), 3);
    EXPECT_EQ(tri.profiles[1].kind, ColumnKind::Boolean);
    ASSERT_TRUE(tri.maps[2].has_value());
    EXPECT_EQ(tri.maps[2]->labels(), (std::vector<std::string>{"u", "v", "w"}));
    EXPECT_EQ(tri.encoded(2, 2), 2.0);
}

TEST(PreprocessingDf, TripleContract) {
    const auto t = parse_csv("id,a,b,note\n"
                             "r1,1,x,1\n"
                             "r2,NA,y,k\n"
                             "r3,3,,2\n"
                             "r4,0,y,m\n"
                             "r5,5,x,3\n"
                             "r6,6,y,n\n");
    const auto tri = preprocessing_df(t, false, PreImputeStrategy::column_mean());
    EXPECT_EQ(tri.profiles[2].kind, ColumnKind::Excluded);
    EXPECT_EQ(tri.imputable, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(tri.encoded.cols(), 2);
    EXPECT_EQ(tri.matrix_column_names(), (std::vector<std::string>{"a", "b"}));
    EXPECT_TRUE(tri.clean.at(1, 0).is_missing());
    EXPECT_DOUBLE_EQ(tri.preimputed(1, 0), (1 + 3 + 0 + 5 + 6) / 5.0);
    EXPECT_EQ(tri.preimputed(2, 1), 1.0); // y is the mode
    EXPECT_FALSE(tri.preimputed.array().isNaN().any());
    for (Index i = 0; i < tri.encoded.size(); ++i)
        if (!std::isnan(tri.encoded.data()[i])) EXPECT_EQ(tri.preimputed.data()[i], tri.encoded.data()[i]);

    const auto zeros = preprocessing_df(t, true, PreImputeStrategy::column_mean());
    EXPECT_TRUE(std::isnan(zeros.encoded(3, 0)));
    EXPECT_DOUBLE_EQ(zeros.preimputed(3, 0), (1 + 3 + 5 + 6) / 4.0);

    const Table back = reassemble(tri, tri.preimputed);
    EXPECT_EQ(back.at(2, 1), T("y"));
    EXPECT_EQ(back.at(1, 2), T("k"));
}

TEST(PreprocessingDf, NothingToImpute) {
    const auto t = parse_csv("id,a\nr1,1\nr2,x\n");
    EXPECT_THROW(preprocessing_df(t, false, PreImputeStrategy::column_mean()), DataError);
}
