#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ignn/linalg.hpp"
#include "support/reference.hpp"

using namespace ignn;

TEST(DenseMatrix, RejectsBadLengthAndNonFinite) {
    EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(DenseMatrix(1, 2, std::vector<double>{1, NAN}), std::invalid_argument);
    EXPECT_THROW(DenseMatrix(1, 1, std::vector<double>{INFINITY}), std::invalid_argument);
}

TEST(Matmul, Examples) {
    const DenseMatrix M = DenseMatrix::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(matmul(DenseMatrix::identity(2), M), M);
    EXPECT_EQ(matmul(DenseMatrix(2, 2), M), DenseMatrix(2, 2));
    EXPECT_EQ(matmul(M, DenseMatrix::from_rows({{1}, {1}})), DenseMatrix::from_rows({{3}, {7}}));
    EXPECT_THROW(matmul(M, DenseMatrix(3, 1)), DimensionError);
}

TEST(Matmul, TransposedVariantsMatchReference) {
    std::mt19937_64 rng(1);
    const DenseMatrix a = ref::random_dense(5, 7, rng);
    const DenseMatrix b = ref::random_dense(5, 3, rng);
    const DenseMatrix c = ref::random_dense(4, 7, rng);
    EXPECT_LE(max_abs_diff(matmul_tn(a, b), ref::mul(ref::transpose(a), b)), 1e-14);
    EXPECT_LE(max_abs_diff(matmul_nt(a, c), ref::mul(a, ref::transpose(c))), 1e-14);
}

TEST(Matmul, ParallelKernelsMatchSerialBitwise) {
    std::mt19937_64 rng(2);
    // Large enough to cross the parallel threshold.
    const DenseMatrix a = ref::random_dense(64, 300, rng);
    const DenseMatrix b = ref::random_dense(300, 700, rng);
    EXPECT_EQ(matmul(a, b), serial::matmul(a, b));

    const SparseAdjacency A = SparseAdjacency::from_dense(ref::random_adjacency(700, 0.05, rng));
    const DenseMatrix x = ref::random_dense(64, 700, rng);
    EXPECT_EQ(rmul_sparse(x, A), serial::rmul_sparse(x, A));
    EXPECT_EQ(rmul_sparse_t(x, A), serial::rmul_sparse_t(x, A));
}

TEST(RmulSparse, Examples) {
    std::mt19937_64 rng(3);
    const DenseMatrix x = ref::random_dense(3, 3, rng);
    EXPECT_EQ(rmul_sparse(x, SparseAdjacency::identity(3)), x);
    EXPECT_EQ(rmul_sparse(x, SparseAdjacency(3)), DenseMatrix(3, 3));
    const DenseMatrix a = ref::random_adjacency(3, 0.7, rng);
    const SparseAdjacency A = SparseAdjacency::from_dense(a);
    EXPECT_LE(max_abs_diff(rmul_sparse(x, A), ref::mul(x, a)), 1e-12);
    EXPECT_LE(max_abs_diff(rmul_sparse_t(x, A), ref::mul(x, ref::transpose(a))), 1e-12);
    EXPECT_THROW(rmul_sparse(DenseMatrix(2, 4), A), DimensionError);
}

TEST(RmulSparse, AgreesWithDenseOnRandomInstances) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 12, m = 1 + rng() % 6;
        const DenseMatrix a = ref::random_adjacency(n, 0.3, rng);
        const DenseMatrix x = ref::random_dense(m, n, rng);
        EXPECT_LE(max_abs_diff(rmul_sparse(x, SparseAdjacency::from_dense(a)), ref::mul(x, a)), 1e-12);
    }
}

TEST(Norms, Examples) {
    const DenseMatrix M = DenseMatrix::from_rows({{1, -2}, {3, 0}});
    EXPECT_DOUBLE_EQ(inf_norm(M), 3.0);
    EXPECT_DOUBLE_EQ(one_norm(M), 4.0);
    EXPECT_DOUBLE_EQ(inf_norm(DenseMatrix::identity(4)), 1.0);
    EXPECT_DOUBLE_EQ(one_norm(DenseMatrix::identity(4)), 1.0);
    EXPECT_DOUBLE_EQ(inf_norm(DenseMatrix(3, 3)), 0.0);
    EXPECT_DOUBLE_EQ(inf_norm(DenseMatrix()), 0.0);
}

TEST(Norms, OneNormIsInfNormOfTranspose) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix m = ref::random_dense(4, 4, rng);
        EXPECT_DOUBLE_EQ(one_norm(m), inf_norm(m.transposed()));
        EXPECT_DOUBLE_EQ(one_norm(m), ref::col_sum_norm(m));
    }
}

TEST(SparseAdjacency, CachedNormsMatchDense) {
    std::mt19937_64 rng(6);
    const DenseMatrix a = ref::random_adjacency(9, 0.4, rng);
    const SparseAdjacency A = SparseAdjacency::from_dense(a);
    EXPECT_DOUBLE_EQ(A.one_norm(), ref::col_sum_norm(a));
    EXPECT_DOUBLE_EQ(A.inf_norm(), ref::row_sum_norm(a));
    EXPECT_EQ(A.to_dense(), a);
}

TEST(SparseAdjacency, RejectsInvalidCsr) {
    EXPECT_THROW(SparseAdjacency(2, {0, 1, 1}, {2}, {1.0}), std::invalid_argument);   // col out of range
    EXPECT_THROW(SparseAdjacency(2, {0, 1, 1}, {0}, {-1.0}), std::invalid_argument);  // negative
    EXPECT_THROW(SparseAdjacency(2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(SparseAdjacency::from_triplets(2, {{0, 0, -0.5}}), std::invalid_argument);
}

TEST(SparseAdjacency, DuplicatePolicies) {
    const std::vector<SparseAdjacency::Triplet> t{{0, 1, 2.0}, {0, 1, 3.0}};
    EXPECT_DOUBLE_EQ(SparseAdjacency::from_triplets(2, t).at(0, 1), 5.0);
    EXPECT_DOUBLE_EQ(SparseAdjacency::from_triplets(2, t, SparseAdjacency::Duplicates::collapse_to_one).at(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(SparseAdjacency::from_triplets(2, t, SparseAdjacency::Duplicates::keep_max).at(0, 1), 3.0);
}

TEST(PfEigen, Examples) {
    EXPECT_NEAR(pf_eigen(DenseMatrix::identity(5)).lambda, 1.0, 1e-8);

    DenseMatrix upper(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) upper(i, j) = 1.0;
    const PfResult dag = pf_eigen(upper);
    EXPECT_EQ(dag.lambda, 0.0);
    EXPECT_TRUE(dag.nilpotent);

    DenseMatrix cycle(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        cycle(i, (i + 1) % 4) = 1.0;
        cycle((i + 1) % 4, i) = 1.0;
    }
    const PfResult c = pf_eigen(SparseAdjacency::from_dense(cycle));
    EXPECT_NEAR(c.lambda, 2.0, 1e-8);
    double sum = 0.0;
    for (double v : c.vector) {
        EXPECT_GT(v, 0.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(PfEigen, DirectedCycleNeedsTheShift) {
    // Period-3 permutation matrix: unshifted power iteration would cycle forever.
    DenseMatrix p(3, 3);
    p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
    EXPECT_NEAR(pf_eigen(p).lambda, 1.0, 1e-8);
}

TEST(PfEigen, MatchesCharacteristicRootOfTwoByTwo) {
    // [[a, b], [c, d]] >= 0: lambda = (a + d)/2 + sqrt(((a - d)/2)^2 + b c)
    const double a = 0.3, b = 2.0, c = 0.7, d = 1.1;
    const double expected = (a + d) / 2.0 + std::sqrt((a - d) * (a - d) / 4.0 + b * c);
    EXPECT_NEAR(pf_eigen(DenseMatrix::from_rows({{a, b}, {c, d}})).lambda, expected, 1e-8);
}

TEST(PfEigen, BoundedByInfNorm) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const DenseMatrix s = ref::random_adjacency(1 + rng() % 7, 0.5, rng);
        EXPECT_LE(pf_eigen(s).lambda, inf_norm(s) + 1e-8);
    }
}

TEST(PfEigen, RejectsNegativeAndNonSquare) {
    EXPECT_THROW(pf_eigen(DenseMatrix::from_rows({{1, -1}, {0, 1}})), std::invalid_argument);
    EXPECT_THROW(pf_eigen(DenseMatrix(2, 3)), DimensionError);
}

TEST(PfEigen, NonConvergenceCarriesEstimate) {
    PfOptions opts;
    opts.max_iter = 2;
    opts.tol = 1e-15;
    std::mt19937_64 rng(8);
    DenseMatrix s = ref::random_adjacency(6, 0.6, rng);
    s(0, 1) += 1.0;
    try {
        pf_eigen(s, opts);
        FAIL() << "expected PfNonConvergence";
    } catch (const PfNonConvergence& e) {
        EXPECT_EQ(e.iterations(), 2u);
        EXPECT_GT(e.last_estimate(), 0.0);
    }
}

TEST(PfEigen, CachedOnSparseAdjacencyCopies) {
    DenseMatrix cycle(3, 3);
    cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 2.0;
    const SparseAdjacency A = SparseAdjacency::from_dense(cycle);
    const SparseAdjacency B = A;
    EXPECT_NEAR(A.pf_eigenvalue(), 2.0, 1e-8);
    EXPECT_EQ(A.pf_eigenvalue(), B.pf_eigenvalue());
}

TEST(Kron, Examples) {
    EXPECT_EQ(kron_materialize(DenseMatrix::identity(2), DenseMatrix::identity(2)), DenseMatrix::identity(4));
    const DenseMatrix M = DenseMatrix::from_rows({{1, -2}, {0.5, 3}});
    EXPECT_EQ(kron_materialize(DenseMatrix::from_rows({{2}}), M), 2.0 * M);
    EXPECT_THROW(kron_materialize(DenseMatrix(1001, 1), DenseMatrix(1001, 1)), std::length_error);
}

TEST(Kron, VecIdentity) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix A = ref::random_dense(3, 3, rng), W = ref::random_dense(3, 3, rng), X = ref::random_dense(3, 3, rng);
        const DenseMatrix lhs = ref::mul(kron_materialize(ref::transpose(A), W), vec(X));
        const DenseMatrix rhs = vec(ref::mul(ref::mul(W, X), A));
        EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
    }
}

TEST(Vec, RoundTripIsColumnStacking) {
    const DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    const DenseMatrix v = vec(m);
    EXPECT_EQ(v, DenseMatrix(6, 1, std::vector<double>{1, 4, 2, 5, 3, 6}));
    EXPECT_EQ(unvec(v, 2, 3), m);
}

TEST(Acyclic, PatternDetection) {
    DenseMatrix chain(3, 3);
    chain(0, 1) = chain(1, 2) = 1.0;
    EXPECT_TRUE(pattern_is_acyclic(chain));
    chain(2, 0) = 1.0;
    EXPECT_FALSE(pattern_is_acyclic(SparseAdjacency::from_dense(chain)));
}
