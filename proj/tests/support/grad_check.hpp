#pragma once

// Library gradients of an equilibrium instance checked against central
// differences of the reference pipeline.

#include "ignn/equilibrium.hpp"
#include "ignn/implicit_grad.hpp"
#include "reference.hpp"

namespace ignn::ref {

struct AnalyticGrads {
    GradientBundle bundle;
    std::size_t forward_iterations = 0;
    std::size_t backward_iterations = 0;
};

inline AnalyticGrads analytic_grads(const GradInstance& g) {
    const SolveOptions tight{1e-13, 20000};
    const auto As = g.adj();
    const DenseMatrix B = compute_offset(g.form, g.rels, As, g.U);
    const EquilibriumSolution sol = solve_forward_hetero(g.Ws(), As, B, g.phi, tight);
    DenseMatrix gX = g.C;
    axpy(0.5, sol.X, gX);
    const AdjointSolution adj = solve_backward_hetero(g.Ws(), As, sol.D, gX, tight);
    AnalyticGrads out;
    out.bundle = param_grads(adj.G, sol.X, As, g.U, g.rels, g.form, true);
    out.forward_iterations = sol.iterations;
    out.backward_iterations = adj.iterations;
    return out;
}

// Checks every entry of every W_i, Omega and U. Returns false if the instance
// was skipped because a kinked pre-activation lies within 1e-4 of zero.
inline bool check_instance_gradients(GradInstance g, FdStats& stats) {
    if (near_kink(g)) return false;
    const AnalyticGrads a = analytic_grads(g);
    auto f = [&] { return instance_loss(g); };
    for (std::size_t i = 0; i < g.rels.size(); ++i) {
        const std::string base = g.describe() + " rel" + std::to_string(i);
        fd_matrix(f, g.rels[i].W, a.bundle.grad[i].W, stats, base + " W");
        if (g.form != BForm::omega_u) fd_matrix(f, g.rels[i].omega_a, a.bundle.grad[i].omega_a, stats, base + " omega_a");
        if (g.form != BForm::omega_ua) fd_matrix(f, g.rels[i].omega_b, a.bundle.grad[i].omega_b, stats, base + " omega_b");
    }
    fd_matrix(f, g.U, *a.bundle.grad_U, stats, g.describe() + " U");
    return true;
}

}  // namespace ignn::ref
