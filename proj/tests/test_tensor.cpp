#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "tcam/linalg.hpp"
#include "tcam/tensor.hpp"

using namespace tcam;

namespace
{

FeatureTensor indexed_222()
{
    FeatureTensor t({2, 2, 2});
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t w = 0; w < 2; ++w)
                t(c, h, w) = static_cast<double>(4 * c + 2 * h + w);
    return t;
}

} // namespace

TEST(Unfold, Mode1OfIndexedTensor)
{
    const DenseMatrix m = unfold(indexed_222(), 1);
    EXPECT_EQ(m, DenseMatrix(2, 4, {0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Unfold, ScalarTensor)
{
    const FeatureTensor t({1, 1, 1}, {5.0});
    for (int mode = 1; mode <= 3; ++mode)
        EXPECT_EQ(unfold(t, mode), DenseMatrix(1, 1, {5.0}));
}

TEST(Unfold, InvalidMode)
{
    const FeatureTensor t({2, 2, 2});
    EXPECT_THROW(unfold(t, 0), std::invalid_argument);
    EXPECT_THROW(unfold(t, 4), std::invalid_argument);
}

TEST(Unfold, MatchesLoopOracleAndRoundTripsExhaustively)
{
    std::mt19937_64 rng(11);
    for (std::size_t c = 1; c <= 3; ++c)
        for (std::size_t h = 1; h <= 3; ++h)
            for (std::size_t w = 1; w <= 3; ++w) {
                const FeatureTensor t = oracle::random_tensor(rng, {c, h, w});
                for (int mode = 1; mode <= 3; ++mode) {
                    const DenseMatrix m = unfold(t, mode);
                    EXPECT_EQ(m, oracle::unfold_loops(t, mode));
                    EXPECT_EQ(fold(m, mode, t.shape()), t);
                }
            }
}

TEST(Fold, InverseOfUnfoldOnRandomMatrices)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape3 s{2 + rng() % 5, 1 + rng() % 6, 3 + rng() % 4};
        for (int mode = 1; mode <= 3; ++mode) {
            const std::size_t m = static_cast<std::size_t>(mode - 1);
            const DenseMatrix mat = oracle::random_matrix(rng, s[m], s[0] * s[1] * s[2] / s[m]);
            EXPECT_EQ(unfold(fold(mat, mode, s), mode), mat);
        }
    }
}

TEST(Fold, KnownMatrixAndScalar)
{
    EXPECT_EQ(fold(DenseMatrix(2, 4, {0, 1, 2, 3, 4, 5, 6, 7}), 1, {2, 2, 2}), indexed_222());
    EXPECT_EQ(fold(DenseMatrix(1, 1, {5.0}), 2, {1, 1, 1}), FeatureTensor({1, 1, 1}, {5.0}));
}

TEST(Fold, ShapeMismatch)
{
    EXPECT_THROW(fold(DenseMatrix(2, 3), 1, {2, 2, 2}), std::invalid_argument);
    EXPECT_THROW(fold(DenseMatrix(3, 4), 2, {2, 2, 2}), std::invalid_argument);
}

TEST(ModeProduct, RowOfOnesOnMode1)
{
    const FeatureTensor r = mode_product(indexed_222(), DenseMatrix(1, 2, {1, 1}), 1);
    EXPECT_EQ(r, FeatureTensor({1, 2, 2}, {4, 6, 8, 10}));
}

TEST(ModeProduct, IdentityIsNoOp)
{
    std::mt19937_64 rng(3);
    const FeatureTensor t = oracle::random_tensor(rng, {3, 4, 5});
    for (int mode = 1; mode <= 3; ++mode)
        EXPECT_EQ(mode_product(t, DenseMatrix::identity(t.shape()[mode - 1]), mode), t);
}

TEST(ModeProduct, DimensionMismatch)
{
    EXPECT_THROW(mode_product(indexed_222(), DenseMatrix(2, 3), 2), std::invalid_argument);
}

TEST(ModeProduct, AgreesWithContractionOracle)
{
    std::mt19937_64 rng(4);
    for (std::size_t c = 1; c <= 4; ++c)
        for (std::size_t h = 1; h <= 4; ++h)
            for (std::size_t w = 1; w <= 4; ++w) {
                const FeatureTensor t = oracle::random_tensor(rng, {c, h, w});
                for (int mode = 1; mode <= 3; ++mode) {
                    const DenseMatrix a =
                        oracle::random_matrix(rng, 1 + rng() % 4, t.shape()[mode - 1]);
                    const FeatureTensor got = mode_product(t, a, mode);
                    const FeatureTensor want = oracle::mode_product_loops(t, a, mode);
                    ASSERT_EQ(got.shape(), want.shape());
                    EXPECT_LT(oracle::max_abs_diff(got.data(), want.data()), 1e-12);
                }
            }
}

TEST(ModeProduct, DistinctModesCommute)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const FeatureTensor t = oracle::random_tensor(rng, {3, 4, 5});
        const DenseMatrix a = oracle::random_matrix(rng, 2, 3);
        const DenseMatrix b = oracle::random_matrix(rng, 6, 4);
        const FeatureTensor x = mode_product(mode_product(t, a, 1), b, 2);
        const FeatureTensor y = mode_product(mode_product(t, b, 2), a, 1);
        EXPECT_LT(oracle::max_abs_diff(x.data(), y.data()), 1e-12);
    }
}

TEST(ModeProduct, OrthonormalMatrixPreservesNorm)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const FeatureTensor t = oracle::random_tensor(rng, {4, 3, 5});
        for (int mode = 1; mode <= 3; ++mode) {
            const std::size_t n = t.shape()[mode - 1];
            // Random orthogonal matrix from the left singular vectors of a Gaussian.
            const DenseMatrix q = leading_left_vectors(oracle::random_matrix(rng, n, n), n);
            const double before = frobenius_norm(t);
            const double after = frobenius_norm(mode_product(t, transpose(q), mode));
            EXPECT_NEAR(after / before, 1.0, 1e-10);
        }
    }
}

TEST(FrobeniusNorm, Examples)
{
    EXPECT_EQ(frobenius_norm(FeatureTensor({2, 3, 1})), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(FeatureTensor({1, 1, 2}, {3, 4})), 5.0);
}

TEST(FrobeniusNorm, Homogeneity)
{
    std::mt19937_64 rng(7);
    for (double alpha : {-3.5, -1.0, 0.0, 0.25, 7.0}) {
        FeatureTensor t = oracle::random_tensor(rng, {2, 3, 4});
        const double n = frobenius_norm(t);
        for (double& v : t.data())
            v *= alpha;
        EXPECT_NEAR(frobenius_norm(t), std::abs(alpha) * n, 1e-12 * std::max(n, 1.0));
    }
}

TEST(FeatureTensor, RejectsBadShapes)
{
    EXPECT_THROW(FeatureTensor({0, 2, 2}), std::invalid_argument);
    EXPECT_THROW(FeatureTensor({2, 2, 2}, std::vector<double>(7)), std::invalid_argument);
}
