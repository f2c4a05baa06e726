#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tcam/linalg.hpp"

using namespace tcam;

TEST(SymEig, DiagonalInput)
{
    DenseMatrix d(3, 3);
    d(0, 0) = 3;
    d(1, 1) = 1;
    d(2, 2) = 2;
    const EigenResult r = sym_eig(d);
    EXPECT_EQ(r.values, (std::vector<double>{3, 2, 1}));
    // Columns are the permuted identity (0, 2, 1), up to sign.
    const std::size_t expected_row[] = {0, 2, 1};
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_EQ(std::abs(r.vectors(i, k)), i == expected_row[k] ? 1.0 : 0.0);
}

TEST(SymEig, TwoByTwo)
{
    const EigenResult r = sym_eig(DenseMatrix(2, 2, {2, 1, 1, 2}));
    EXPECT_NEAR(r.values[0], 3.0, 1e-14);
    EXPECT_NEAR(r.values[1], 1.0, 1e-14);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(r.vectors(0, 0)), s, 1e-14);
    EXPECT_NEAR(r.vectors(0, 0), r.vectors(1, 0), 1e-14);
    EXPECT_NEAR(r.vectors(0, 1), -r.vectors(1, 1), 1e-14);
}

TEST(SymEig, ZeroMatrix)
{
    const EigenResult r = sym_eig(DenseMatrix(3, 3));
    for (double v : r.values)
        EXPECT_EQ(v, 0.0);
    EXPECT_LT(oracle::max_orthonormality_error(r.vectors), 1e-15);
}

TEST(SymEig, RejectsNonSquareAndAsymmetric)
{
    EXPECT_THROW(sym_eig(DenseMatrix(2, 3)), std::invalid_argument);
    EXPECT_THROW(sym_eig(DenseMatrix(2, 2, {1, 2, 3, 4})), std::invalid_argument);
}

TEST(SymEig, ResidualAndOrthonormalityOnRandomSymmetric)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const DenseMatrix a = oracle::random_matrix(rng, n, n);
        const DenseMatrix s = matmul(transpose(a), a);
        const EigenResult r = sym_eig(s);
        EXPECT_LT(oracle::max_orthonormality_error(r.vectors), 1e-12);
        EXPECT_TRUE(std::is_sorted(r.values.rbegin(), r.values.rend()));
        const DenseMatrix sv = matmul(s, r.vectors);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                EXPECT_NEAR(sv(i, k), r.values[k] * r.vectors(i, k), 1e-8 * frobenius_norm(s));
    }
}

TEST(Oracle, JacobiEigenvaluesAgreeWithClosedFormAndEigen)
{
    const auto two = oracle::jacobi_eigenvalues(DenseMatrix(2, 2, {2, 1, 1, 2}));
    EXPECT_NEAR(two[0], 3.0, 1e-14);
    EXPECT_NEAR(two[1], 1.0, 1e-14);
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        const DenseMatrix a = oracle::random_matrix(rng, n + rng() % 3, n);
        const auto got = oracle::jacobi_eigenvalues(matmul(transpose(a), a));
        const auto want = oracle::gram_eigenvalues_eigen(a);
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(got[i], want[i], 1e-12 * want[0]);
    }
}

TEST(SvdThin, Identity)
{
    const SvdResult r = svd_thin(DenseMatrix::identity(4));
    for (double s : r.sigma)
        EXPECT_NEAR(s, 1.0, 1e-15);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_NEAR(std::abs(r.U(i, j)), i == j ? 1.0 : 0.0, 1e-15);
            EXPECT_NEAR(std::abs(r.V(i, j)), i == j ? 1.0 : 0.0, 1e-15);
        }
}

TEST(SvdThin, RankOneOuterProduct)
{
    // a = (1,2), b = (3,4): sigma_1 = |a||b| = sqrt(5)*5.
    const SvdResult r = svd_thin(DenseMatrix(2, 2, {3, 4, 6, 8}));
    EXPECT_NEAR(r.sigma[0], 5.0 * std::sqrt(5.0), 1e-12);
    EXPECT_EQ(r.sigma[1], 0.0);
    EXPECT_LT(oracle::max_orthonormality_error(r.U), 1e-12);
    EXPECT_LT(oracle::max_orthonormality_error(r.V), 1e-12);
}

TEST(SvdThin, RandomSixByFourReconstruction)
{
    std::mt19937_64 rng(22);
    const DenseMatrix m = oracle::random_matrix(rng, 6, 4);
    const SvdResult r = svd_thin(m);
    ASSERT_EQ(r.U.rows(), 6u);
    ASSERT_EQ(r.U.cols(), 4u);
    ASSERT_EQ(r.V.rows(), 4u);
    const DenseMatrix back = oracle::accumulate_svd(r.U, r.sigma, r.V);
    EXPECT_LT(oracle::relative_error(back.data(), m.data()), 1e-10);
}

TEST(SvdThin, EmptyAndNonFinite)
{
    EXPECT_THROW(svd_thin(DenseMatrix()), std::invalid_argument);
    EXPECT_THROW(svd_thin(DenseMatrix(1, 1, {NAN})), std::invalid_argument);
}

TEST(SvdThin, PropertiesOnRandomShapes)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 1 + rng() % 15;
        const std::size_t cols = 1 + rng() % 15;
        const DenseMatrix m = oracle::random_matrix(rng, rows, cols);
        const SvdResult r = svd_thin(m);
        const SvdResult rt = svd_thin(transpose(m));
        const auto ev = oracle::gram_eigenvalues_eigen(m);
        ASSERT_EQ(r.sigma.size(), std::min(rows, cols));
        EXPECT_TRUE(std::is_sorted(r.sigma.rbegin(), r.sigma.rend()));
        EXPECT_LT(oracle::max_orthonormality_error(r.U), 1e-9);
        EXPECT_LT(oracle::max_orthonormality_error(r.V), 1e-9);
        const DenseMatrix back = oracle::accumulate_svd(r.U, r.sigma, r.V);
        EXPECT_LT(oracle::relative_error(back.data(), m.data()), 1e-8);
        for (std::size_t i = 0; i < r.sigma.size(); ++i) {
            EXPECT_NEAR(r.sigma[i] * r.sigma[i], ev[i], 1e-8 * ev[0]);
            EXPECT_NEAR(r.sigma[i], rt.sigma[i], 1e-10 * r.sigma[0]);
        }
    }
}

TEST(SvdThin, RankDeficientColumnsAreCompleted)
{
    // 5x3 with rank 1: the two zero directions must still be orthonormal.
    DenseMatrix m(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            m(i, j) = static_cast<double>(i + 1) * static_cast<double>(j + 2);
    const SvdResult r = svd_thin(m);
    EXPECT_EQ(r.sigma[1], 0.0);
    EXPECT_EQ(r.sigma[2], 0.0);
    EXPECT_LT(oracle::max_orthonormality_error(r.U), 1e-12);
    EXPECT_LT(oracle::max_orthonormality_error(r.V), 1e-12);
}

TEST(FixSigns, Examples)
{
    EXPECT_EQ(fix_signs(DenseMatrix(2, 1, {-3, 1})), DenseMatrix(2, 1, {3, -1}));
    EXPECT_EQ(fix_signs(DenseMatrix(2, 1, {2, -1})), DenseMatrix(2, 1, {2, -1}));
    // Tie on magnitude: the first index decides.
    EXPECT_EQ(fix_signs(DenseMatrix(2, 1, {-1, 1})), DenseMatrix(2, 1, {1, -1}));
}

TEST(FixSigns, Idempotent)
{
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix m = oracle::random_matrix(rng, 1 + rng() % 6, 1 + rng() % 6);
        const DenseMatrix once = fix_signs(m);
        EXPECT_EQ(fix_signs(once), once);
    }
}

TEST(CompleteOrthonormal, ExtendsTallBlock)
{
    std::mt19937_64 rng(25);
    const DenseMatrix q = leading_left_vectors(oracle::random_matrix(rng, 40, 3), 3);
    const DenseMatrix full = complete_orthonormal(q, 3, 40);
    EXPECT_LT(oracle::max_orthonormality_error(full), 1e-13);
    for (std::size_t c = 0; c < 3; ++c)
        EXPECT_EQ(full.column(c), q.column(c));
}

TEST(LeadingLeftVectors, BeyondNumericalRank)
{
    std::mt19937_64 rng(26);
    const DenseMatrix m = oracle::random_matrix(rng, 30, 4);
    const DenseMatrix u = leading_left_vectors(m, 30);
    EXPECT_EQ(u.cols(), 30u);
    EXPECT_LT(oracle::max_orthonormality_error(u), 1e-12);
    EXPECT_THROW(leading_left_vectors(m, 31), std::invalid_argument);
}
