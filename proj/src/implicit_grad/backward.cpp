#include "ignn/implicit_grad.hpp"

namespace ignn {

std::string to_string(BForm f) {
    switch (f) {
        case BForm::omega_ua: return "omega_ua";
        case BForm::omega_u: return "omega_u";
        case BForm::both: return "both";
    }
    return "?";
}

BForm parse_bform(const std::string& text) {
    if (text == "omega_ua") return BForm::omega_ua;
    if (text == "omega_u") return BForm::omega_u;
    if (text == "both") return BForm::both;
    throw std::invalid_argument("unknown b_form '" + text + "' (expected omega_ua, omega_u or both)");
}

DenseMatrix compute_offset(BForm form, const std::vector<RelationParams>& relations,
                           const std::vector<const SparseAdjacency*>& As, const DenseMatrix& U) {
    if (relations.size() != As.size()) throw DimensionError("compute_offset: one adjacency per relation");
    if (relations.empty()) throw DimensionError("compute_offset: no relations");
    DenseMatrix B(relations.front().W.rows(), U.cols());
    for (std::size_t i = 0; i < relations.size(); ++i) {
        if (uses_ua(form)) B += rmul_sparse(matmul(relations[i].omega_a, U), *As[i]);
        if (uses_u(form)) B += matmul(relations[i].omega_b, U);
    }
    return B;
}

std::vector<DenseMatrix> weights_of(const std::vector<RelationParams>& relations) {
    std::vector<DenseMatrix> w;
    w.reserve(relations.size());
    for (const auto& r : relations) w.push_back(r.W);
    return w;
}

AdjointSolution solve_backward_hetero(const std::vector<DenseMatrix>& Ws,
                                      const std::vector<const SparseAdjacency*>& As, const DenseMatrix& D,
                                      const DenseMatrix& grad_X, const SolveOptions& opts) {
    if (!D.same_shape(grad_X)) throw DimensionError("solve_backward: D and grad_X shapes differ");
    if (Ws.empty() || Ws.size() != As.size()) throw DimensionError("solve_backward: need equal, nonempty W and A lists");
    for (std::size_t i = 0; i < Ws.size(); ++i) {
        if (Ws[i].rows() != D.rows() || Ws[i].cols() != D.rows() || As[i]->n() != D.cols()) {
            throw DimensionError("solve_backward: relation " + std::to_string(i) + " does not match D");
        }
    }

    AdjointSolution sol;
    sol.G = DenseMatrix(D.rows(), D.cols());
    for (std::size_t t = 0;; ++t) {
        DenseMatrix next;
        try {
            next = grad_X;
            for (std::size_t i = 0; i < Ws.size(); ++i) next += matmul_tn(Ws[i], rmul_sparse_t(sol.G, *As[i]));
            next = hadamard(D, next);
        } catch (const std::overflow_error&) {
            throw NonConvergence("backward solve diverged at iteration " + std::to_string(t), sol.G, sol.residuals);
        }
        const double r = max_abs_diff(next, sol.G);
        sol.residuals.push_back(r);
        if (r <= opts.tol) {
            sol.iterations = t;
            return sol;
        }
        if (t == opts.max_iter) {
            throw NonConvergence("backward solve did not converge in " + std::to_string(opts.max_iter) +
                                     " iterations (residual " + std::to_string(r) + ")",
                                 std::move(sol.G), std::move(sol.residuals));
        }
        sol.G = std::move(next);
    }
}

AdjointSolution solve_backward(const DenseMatrix& W, const SparseAdjacency& A, const DenseMatrix& D,
                               const DenseMatrix& grad_X, const SolveOptions& opts) {
    return solve_backward_hetero(std::vector<DenseMatrix>{W}, {&A}, D, grad_X, opts);
}

GradientBundle param_grads(const DenseMatrix& grad_Z, const DenseMatrix& X,
                           const std::vector<const SparseAdjacency*>& As, const DenseMatrix& U,
                           const std::vector<RelationParams>& relations, BForm form, bool want_grad_U) {
    if (relations.size() != As.size()) throw DimensionError("param_grads: one adjacency per relation");
    if (!grad_Z.same_shape(X)) throw DimensionError("param_grads: grad_Z and X shapes differ");
    if (U.cols() != X.cols()) throw DimensionError("param_grads: U and X node counts differ");

    GradientBundle out;
    out.grad_Z = grad_Z;
    if (want_grad_U) out.grad_U = DenseMatrix(U.rows(), U.cols());
    for (std::size_t i = 0; i < relations.size(); ++i) {
        const auto& rel = relations[i];
        const DenseMatrix gat = rmul_sparse_t(grad_Z, *As[i]);  // G A_i^T
        RelationParams g;
        g.W = matmul_nt(gat, X);
        if (uses_ua(form)) {
            g.omega_a = matmul_nt(gat, U);
            if (want_grad_U) *out.grad_U += matmul_tn(rel.omega_a, gat);
        }
        if (uses_u(form)) {
            g.omega_b = matmul_nt(grad_Z, U);
            if (want_grad_U) *out.grad_U += matmul_tn(rel.omega_b, grad_Z);
        }
        out.grad.push_back(std::move(g));
    }
    return out;
}

}  // namespace ignn
