#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ignn/implicit_grad.hpp"
#include "support/grad_check.hpp"

using namespace ignn;

namespace {

// max |D .* (sum_i W_i^T G A_i^T + gX) - G| with dense reference products
double substitution_residual(const std::vector<DenseMatrix>& Ws, const std::vector<DenseMatrix>& As,
                             const DenseMatrix& D, const DenseMatrix& gX, const DenseMatrix& G) {
    DenseMatrix rhs = gX;
    for (std::size_t i = 0; i < Ws.size(); ++i) rhs += ref::mul(ref::mul(ref::transpose(Ws[i]), G), ref::transpose(As[i]));
    double worst = 0.0;
    for (std::size_t k = 0; k < G.size(); ++k)
        worst = std::max(worst, std::fabs(D.values()[k] * rhs.values()[k] - G.values()[k]));
    return worst;
}

}  // namespace

TEST(SolveBackward, ZeroWeights) {
    std::mt19937_64 rng(1);
    const SparseAdjacency A = SparseAdjacency::from_dense(ref::random_adjacency(4, 0.5, rng));
    const DenseMatrix D = ref::random_dense(3, 4, rng, 0, 1), gX = ref::random_dense(3, 4, rng);
    const auto adj = solve_backward(DenseMatrix(3, 3), A, D, gX);
    EXPECT_EQ(adj.iterations, 1u);
    EXPECT_EQ(adj.G, hadamard(D, gX));
}

TEST(SolveBackward, DeadUnitsGiveZero) {
    std::mt19937_64 rng(2);
    const SparseAdjacency A = SparseAdjacency::from_dense(ref::random_adjacency(4, 0.5, rng));
    DenseMatrix W = ref::random_dense(3, 3, rng);
    W *= 0.9 / (A.one_norm() * inf_norm(W));
    const auto adj = solve_backward(W, A, DenseMatrix(3, 4), ref::random_dense(3, 4, rng));
    EXPECT_EQ(adj.G, DenseMatrix(3, 4));
}

TEST(SolveBackward, SubstitutionResidual) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix a = ref::random_adjacency(4, 0.6, rng);
        DenseMatrix W = ref::random_dense(3, 3, rng);
        W *= 0.9 / (ref::col_sum_norm(a) * ref::row_sum_norm(W));
        const DenseMatrix D = ref::random_dense(3, 4, rng, 0, 1), gX = ref::random_dense(3, 4, rng);
        const auto adj = solve_backward(W, SparseAdjacency::from_dense(a), D, gX, {1e-12, 5000});
        EXPECT_LE(substitution_residual({W}, {a}, D, gX, adj.G), 1e-8);
    }
}

TEST(SolveBackward, GeometricEnvelopeForSymmetricOperators) {
    std::mt19937_64 rng(4);
    for (double kappa : {0.5, 0.9, 0.95}) {
        const DenseMatrix a = ref::random_adjacency(6, 0.5, rng, true);
        DenseMatrix W = ref::random_dense(4, 4, rng);
        W = W + ref::transpose(W);
        W *= kappa / (ref::col_sum_norm(a) * ref::row_sum_norm(W));
        const auto adj = solve_backward(W, SparseAdjacency::from_dense(a), ref::random_dense(4, 6, rng, 0, 1),
                                        ref::random_dense(4, 6, rng), {1e-12, 2000});
        for (std::size_t t = 0; t < adj.residuals.size(); ++t)
            EXPECT_LE(adj.residuals[t], adj.residuals[0] * std::pow(kappa, static_cast<double>(t)) * 1.01);
    }
}

TEST(SolveBackward, NonConvergenceWhenOperatorExpands) {
    const DenseMatrix one(1, 1, 1.0);
    const SparseAdjacency A = SparseAdjacency::from_dense(one);
    EXPECT_THROW(solve_backward(DenseMatrix(1, 1, 2.0), A, one, one), NonConvergence);
}

TEST(SolveBackwardHetero, ReducesAndSubstitutes) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = ref::random_grad_instance(rng, 2, Activation::relu(), BForm::omega_ua, 0.9);
        const std::size_t m = g.rels.front().W.rows(), n = g.U.cols();
        const DenseMatrix D = ref::random_dense(m, n, rng, 0, 1), gX = ref::random_dense(m, n, rng);
        const auto adj = solve_backward_hetero(g.Ws(), g.adj(), D, gX, {1e-12, 5000});
        EXPECT_LE(substitution_residual(g.Ws(), g.A_dense, D, gX, adj.G), 1e-8);

        const auto single = solve_backward(g.Ws()[0], g.A[0], D, gX);
        const auto single_h = solve_backward_hetero({g.Ws()[0]}, {&g.A[0]}, D, gX);
        EXPECT_EQ(single.G, single_h.G);
    }
    const SparseAdjacency A = SparseAdjacency::identity(2);
    const DenseMatrix D(1, 2, 0.5), gX(1, 2, 1.0);
    EXPECT_EQ(solve_backward_hetero({DenseMatrix(1, 1), DenseMatrix(1, 1)}, {&A, &A}, D, gX).G, hadamard(D, gX));
}

TEST(ParamGrads, ZeroAdjointGivesZeroGradients) {
    std::mt19937_64 rng(6);
    const auto g = ref::random_grad_instance(rng, 1, Activation::relu(), BForm::both);
    const DenseMatrix X = ref::random_dense(g.rels[0].W.rows(), g.U.cols(), rng);
    const auto b = param_grads(DenseMatrix(X.rows(), X.cols()), X, g.adj(), g.U, g.rels, g.form);
    EXPECT_EQ(max_abs(b.grad[0].W), 0.0);
    EXPECT_EQ(max_abs(b.grad[0].omega_a), 0.0);
    EXPECT_EQ(max_abs(b.grad[0].omega_b), 0.0);
    EXPECT_EQ(max_abs(*b.grad_U), 0.0);
}

TEST(ParamGrads, ScalarHandChainRule) {
    // x = relu(w x a + o1 u a + o2 u) on the positive branch: x = (o1 a + o2) u / (1 - w a).
    // L = c x  =>  dL/dx = c, G = c / (1 - w a) (D = 1, adjoint G = D (w G a + c)).
    const double w = 0.4, a = 1.5, o1 = 0.7, o2 = -0.2, u = 2.0, c = 1.3;
    const double x = (o1 * a + o2) * u / (1 - w * a);
    const double G = c / (1 - w * a);
    RelationParams r{DenseMatrix(1, 1, w), DenseMatrix(1, 1, o1), DenseMatrix(1, 1, o2)};
    const SparseAdjacency A = SparseAdjacency::from_dense(DenseMatrix(1, 1, a));
    const auto sol = solve_forward(r.W, A, compute_offset(BForm::both, {r}, {&A}, DenseMatrix(1, 1, u)),
                                   Activation::relu(), {1e-14, 1000});
    EXPECT_NEAR(sol.X(0, 0), x, 1e-12);
    const auto adj = solve_backward(r.W, A, sol.D, DenseMatrix(1, 1, c), {1e-14, 1000});
    EXPECT_NEAR(adj.G(0, 0), G, 1e-12);
    const auto b = param_grads(adj.G, sol.X, {&A}, DenseMatrix(1, 1, u), {r}, BForm::both);
    EXPECT_NEAR(b.grad[0].W(0, 0), G * a * x, 1e-10);
    EXPECT_NEAR(b.grad[0].omega_a(0, 0), G * a * u, 1e-10);
    EXPECT_NEAR(b.grad[0].omega_b(0, 0), G * u, 1e-10);
    EXPECT_NEAR((*b.grad_U)(0, 0), o1 * G * a + o2 * G, 1e-10);
}

TEST(ParamGrads, ShapesMirrorParameters) {
    std::mt19937_64 rng(7);
    const auto g = ref::random_grad_instance(rng, 2, Activation::tanh(), BForm::omega_u);
    const auto a = ref::analytic_grads(g);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_TRUE(a.bundle.grad[i].W.same_shape(g.rels[i].W));
        EXPECT_TRUE(a.bundle.grad[i].omega_a.empty());
        EXPECT_TRUE(a.bundle.grad[i].omega_b.same_shape(g.rels[i].omega_b));
    }
    EXPECT_TRUE(a.bundle.grad_U->same_shape(g.U));
    EXPECT_THROW(param_grads(DenseMatrix(1, 1), DenseMatrix(2, 2), g.adj(), g.U, g.rels, g.form), DimensionError);
}

TEST(ParamGrads, FiniteDifferencesEveryActivationAndForm) {
    std::mt19937_64 rng(8);
    ref::FdStats stats;
    std::size_t used = 0;
    for (int trial = 0; used < 30 && trial < 200; ++trial) {
        const auto phi = ref::all_activations()[trial % 5];
        const auto form = ref::all_bforms()[(trial / 5) % 3];
        if (ref::check_instance_gradients(ref::random_grad_instance(rng, 1, phi, form), stats)) ++used;
    }
    EXPECT_EQ(used, 30u);
    EXPECT_EQ(stats.failed, 0u) << stats.first_failure;
}

TEST(ParamGrads, FiniteDifferencesHeterogeneous) {
    std::mt19937_64 rng(9);
    ref::FdStats stats;
    std::size_t used = 0;
    for (int trial = 0; used < 15 && trial < 100; ++trial) {
        const auto phi = ref::all_activations()[trial % 5];
        const auto form = ref::all_bforms()[(trial / 5) % 3];
        if (ref::check_instance_gradients(ref::random_grad_instance(rng, 2, phi, form), stats)) ++used;
    }
    EXPECT_EQ(used, 15u);
    EXPECT_EQ(stats.failed, 0u) << stats.first_failure;
}

TEST(ParamGrads, RecomputedMaskChangesNothing) {
    std::mt19937_64 rng(10);
    const auto g = ref::random_grad_instance(rng, 1, Activation::sigmoid(), BForm::omega_ua);
    const auto As = g.adj();
    const DenseMatrix B = compute_offset(g.form, g.rels, As, g.U);
    const auto sol = solve_forward_hetero(g.Ws(), As, B, g.phi, {1e-13, 5000});
    const DenseMatrix D2 = derivative(g.phi, aggregate(g.Ws(), As, sol.X) + B);
    const auto a1 = solve_backward_hetero(g.Ws(), As, sol.D, g.C, {1e-13, 5000});
    const auto a2 = solve_backward_hetero(g.Ws(), As, D2, g.C, {1e-13, 5000});
    const auto b1 = param_grads(a1.G, sol.X, As, g.U, g.rels, g.form);
    const auto b2 = param_grads(a2.G, sol.X, As, g.U, g.rels, g.form);
    EXPECT_LE(max_abs_diff(b1.grad[0].W, b2.grad[0].W), 1e-12);
    EXPECT_LE(max_abs_diff(b1.grad[0].omega_a, b2.grad[0].omega_a), 1e-12);
}
