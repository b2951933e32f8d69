#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ignn/graph.hpp"
#include "ignn/wellposed.hpp"
#include "support/reference.hpp"

using namespace ignn;

namespace {

SparseAdjacency renormalized_symmetric(std::size_t n, std::mt19937_64& rng) {
    DenseMatrix a = ref::random_adjacency(n, 0.4, rng, true);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 0.0;
    return renormalize(SparseAdjacency::from_dense(a));
}

}  // namespace

TEST(Check, DagIsAlwaysWellPosed) {
    DenseMatrix chain(4, 4);
    chain(0, 1) = chain(1, 2) = chain(2, 3) = 1.0;
    const auto r = check(DenseMatrix(3, 3, 50.0), SparseAdjacency::from_dense(chain));
    EXPECT_EQ(r.product, 0.0);
    EXPECT_TRUE(r.pf_holds);
    EXPECT_TRUE(r.tractable_holds);
}

TEST(Check, IllPosedScalar) {
    const auto r = check(DenseMatrix(1, 1, 1.0), SparseAdjacency::from_dense(DenseMatrix(1, 1, 1.0)));
    EXPECT_NEAR(r.product, 1.0, 1e-8);
    EXPECT_FALSE(r.pf_holds);
    EXPECT_FALSE(r.tractable_holds);
}

TEST(Check, HalfNormOnRenormalizedGraph) {
    std::mt19937_64 rng(1);
    const SparseAdjacency A = renormalized_symmetric(10, rng);
    DenseMatrix W = ref::random_dense(4, 4, rng);
    W *= 0.5 / inf_norm(W);
    const auto r = check(W, A);
    EXPECT_NEAR(r.lambda_pf_A, 1.0, 1e-6);
    EXPECT_TRUE(r.pf_holds);
    EXPECT_TRUE(r.tractable_holds);
    EXPECT_NEAR(r.product, r.lambda_pf_A * r.lambda_pf_absW, 1e-12);
}

TEST(Check, TractableImpliesPf) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const SparseAdjacency A = SparseAdjacency::from_dense(ref::random_adjacency(2 + rng() % 5, 0.5, rng));
        DenseMatrix W = ref::random_dense(3, 3, rng);
        W *= std::uniform_real_distribution<double>(0.1, 2.0)(rng) / std::max(1e-9, A.pf_eigenvalue() * inf_norm(W));
        const auto r = check(W, A);
        if (r.tractable_holds) EXPECT_TRUE(r.pf_holds);
    }
}

TEST(CheckHetero, Examples) {
    std::mt19937_64 rng(3);
    const SparseAdjacency A1 = SparseAdjacency::from_dense(ref::random_adjacency(5, 0.5, rng));
    const SparseAdjacency A2 = SparseAdjacency::from_dense(ref::random_adjacency(5, 0.5, rng));
    DenseMatrix W1 = ref::random_dense(3, 3, rng), W2 = ref::random_dense(3, 3, rng);
    W1 *= 0.4 / (A1.one_norm() * inf_norm(W1));
    W2 *= 0.4 / (A2.one_norm() * inf_norm(W2));
    const auto r = check_hetero({W1, W2}, {&A1, &A2}, 0.8);
    EXPECT_NEAR(r.tractable_bound, 0.8, 1e-12);
    EXPECT_TRUE(r.tractable_holds);
    ASSERT_TRUE(r.kron_pf_computed);
    EXPECT_LE(r.kron_pf, r.tractable_bound + 1e-8);
    EXPECT_TRUE(r.pf_holds);

    const auto single = check_hetero({W1}, {&A1}, 0.8);
    const auto direct = check(W1, A1);
    EXPECT_EQ(single.product, direct.product);
    EXPECT_EQ(single.pf_holds, direct.pf_holds);
}

TEST(CheckHetero, KroneckerBoundedByNormSum) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 4, m = 1 + rng() % 3;
        const SparseAdjacency A1 = SparseAdjacency::from_dense(ref::random_adjacency(n, 0.5, rng));
        const SparseAdjacency A2 = SparseAdjacency::from_dense(ref::random_adjacency(n, 0.5, rng));
        const auto r = check_hetero({ref::random_dense(m, m, rng), ref::random_dense(m, m, rng)}, {&A1, &A2}, 0.9);
        ASSERT_TRUE(r.kron_pf_computed);
        EXPECT_LE(r.kron_pf, r.tractable_bound * (1 + 1e-8) + 1e-10);
    }
}

TEST(CheckHetero, LargeInstancesSkipKronecker) {
    std::mt19937_64 rng(5);
    const SparseAdjacency A1 = SparseAdjacency::from_dense(ref::random_adjacency(50, 0.1, rng));
    const SparseAdjacency A2 = SparseAdjacency::from_dense(ref::random_adjacency(50, 0.1, rng));
    DenseMatrix W = ref::random_dense(10, 10, rng);
    W *= 0.1 / (std::max(A1.one_norm(), A2.one_norm()) * inf_norm(W));
    const auto r = check_hetero({W, W}, {&A1, &A2}, 0.5);
    EXPECT_FALSE(r.kron_pf_computed);
    EXPECT_TRUE(r.tractable_holds);
    EXPECT_TRUE(r.pf_holds);
}

TEST(L1Projection, Examples) {
    EXPECT_EQ(l1_ball_project(std::vector<double>{0.2, -0.3}, 1.0), (std::vector<double>{0.2, -0.3}));
    EXPECT_EQ(l1_ball_project(std::vector<double>{0.2, -0.3}, 0.0), (std::vector<double>{0.0, 0.0}));
    const auto p = l1_ball_project(std::vector<double>{3.0, 1.0}, 1.0);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_THROW(l1_ball_project(std::vector<double>{1.0}, -1.0), std::invalid_argument);
}

TEST(L1Projection, MatchesFaceEnumerationAndIsIdempotent) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-3.0, 3.0), rr(0.0, 3.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t dim = 1 + trial % 3;
        std::vector<double> v(dim);
        for (double& x : v) x = d(rng);
        const double r = rr(rng);
        const auto p = l1_ball_project(v, r);
        const auto oracle = ref::l1_ball_oracle(v, r);
        double l1 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            EXPECT_NEAR(p[i], oracle[i], 1e-9);
            l1 += std::fabs(p[i]);
        }
        EXPECT_LE(l1, r + 1e-12);
        EXPECT_EQ(l1_ball_project(p, r), p);
    }
}

TEST(L1Projection, TiesAreHandled) {
    const auto p = l1_ball_project(std::vector<double>{2.0, -2.0, 2.0}, 3.0);
    for (double x : p) EXPECT_DOUBLE_EQ(std::fabs(x), 1.0);
}

TEST(ProjectW, Examples) {
    const DenseMatrix W = DenseMatrix::from_rows({{3, 1}, {0.2, 0.1}});
    const DenseMatrix P = project_W(W, 1.0);
    EXPECT_EQ(P, DenseMatrix::from_rows({{1, 0}, {0.2, 0.1}}));
    EXPECT_EQ(project_W(W, INFINITY), W);
    EXPECT_EQ(project_W(P, 1.0), P);
}

TEST(ProjectW, NeverIncreasesRowNorms) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const DenseMatrix W = ref::random_dense(6, 6, rng, -2, 2);
        const double radius = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
        const DenseMatrix P = project_W(W, radius);
        EXPECT_LE(inf_norm(P), radius + 1e-12);
        for (std::size_t i = 0; i < 6; ++i) {
            double before = 0.0, after = 0.0;
            for (std::size_t j = 0; j < 6; ++j) {
                before += std::fabs(W(i, j));
                after += std::fabs(P(i, j));
            }
            EXPECT_LE(after, before + 1e-15);
        }
        EXPECT_EQ(project_W(P, radius), P);
    }
}

TEST(ConstraintSpec, RadiusFromGraph) {
    DenseMatrix cycle(4, 4);
    for (std::size_t i = 0; i < 4; ++i) cycle(i, (i + 1) % 4) = cycle((i + 1) % 4, i) = 1.0;
    const auto spec = ConstraintSpec::for_graph(0.95, SparseAdjacency::from_dense(cycle));
    EXPECT_NEAR(spec.radius, 0.475, 1e-8);
    DenseMatrix dag(3, 3);
    dag(0, 1) = 1.0;
    EXPECT_TRUE(std::isinf(ConstraintSpec::for_graph(0.95, SparseAdjacency::from_dense(dag)).radius));
    EXPECT_THROW(ConstraintSpec::for_graph(1.0, SparseAdjacency::identity(2)), std::invalid_argument);
}

TEST(ConstraintSpec, RelationRadiiAndCertification) {
    const SparseAdjacency A1 = SparseAdjacency::from_dense(DenseMatrix::from_rows({{0, 2}, {1, 0}}));
    const SparseAdjacency A2 = SparseAdjacency::identity(2);
    const auto spec = ConstraintSpec::for_relations({0.55, 0.55}, {&A1, &A2});
    EXPECT_NEAR(spec.relation_radii[0], 0.55 / 2.0, 1e-15);
    EXPECT_NEAR(spec.relation_radii[1], 0.55, 1e-15);
    EXPECT_FALSE(spec.certified());
    EXPECT_TRUE(ConstraintSpec::for_relations({0.4, 0.5}, {&A1, &A2}).certified());
    const auto projected = project_relations({DenseMatrix(2, 2, 1.0), DenseMatrix(2, 2, 1.0)}, spec);
    EXPECT_LE(inf_norm(projected[0]), 0.275 + 1e-12);
    EXPECT_LE(inf_norm(projected[1]), 0.55 + 1e-12);
}

TEST(Rescale, SymmetricIsUnchanged) {
    const DenseMatrix W = DenseMatrix::from_rows({{0, 0.5}, {0.5, 0}});
    const auto r = rescale(W);
    EXPECT_NEAR(r.lambda_pf_absW, 0.5, 1e-9);
    EXPECT_LE(max_abs_diff(r.W, W), 1e-9);
    EXPECT_NEAR(r.pf_vector[0], r.pf_vector[1], 1e-9);
}

TEST(Rescale, HandSolvedExample) {
    const auto r = rescale(DenseMatrix::from_rows({{0, 4}, {0.01, 0}}));
    EXPECT_NEAR(r.lambda_pf_absW, 0.2, 1e-9);
    EXPECT_NEAR(r.pf_vector[0] / r.pf_vector[1], 20.0, 1e-6);
    EXPECT_LE(max_abs_diff(r.W, DenseMatrix::from_rows({{0, 0.2}, {0.2, 0}})), 1e-8);
    EXPECT_NEAR(inf_norm(r.W), 0.2, 1e-6);
}

TEST(Rescale, InfNormEqualsPfOfAbsW) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        DenseMatrix W = ref::random_dense(5, 5, rng);
        for (std::size_t i = 0; i < 5; ++i)
            for (double& x : W.row(i)) x *= std::exp(2.0 * static_cast<double>(i) - 4.0);
        const auto r = rescale(W);
        EXPECT_NEAR(inf_norm(r.W), r.lambda_pf_absW, 1e-6);
        EXPECT_NEAR(r.lambda_pf_absW, pf_eigen(abs(W)).lambda, 1e-6);
    }
}

TEST(Rescale, ReducibleWIsRegularized) {
    // |W| upper triangular plus a zero row: PF vector has zeros without the perturbation.
    const auto r = rescale(DenseMatrix::from_rows({{0.5, 1.0}, {0.0, 0.0}}));
    EXPECT_TRUE(r.regularized);
    EXPECT_NEAR(inf_norm(r.W), 0.5, 1e-6);
}
