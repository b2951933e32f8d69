#include "ignn/equilibrium.hpp"

namespace ignn {

NonConvergence::NonConvergence(std::string what, DenseMatrix last, std::vector<double> residuals)
    : std::runtime_error(std::move(what)), last_(std::move(last)), residuals_(std::move(residuals)) {}

NonConvergence NonConvergence::with_context(const std::string& prefix) const {
    return NonConvergence(prefix + ": " + what(), last_, residuals_);
}

DenseMatrix aggregate(const std::vector<DenseMatrix>& Ws, const std::vector<const SparseAdjacency*>& As,
                      const DenseMatrix& X) {
    DenseMatrix sum(X.rows(), X.cols());
    for (std::size_t i = 0; i < Ws.size(); ++i) sum += matmul(Ws[i], rmul_sparse(X, *As[i]));
    return sum;
}

namespace {

void check_shapes(const std::vector<DenseMatrix>& Ws, const std::vector<const SparseAdjacency*>& As,
                  const DenseMatrix& B) {
    if (Ws.empty() || Ws.size() != As.size()) throw DimensionError("solve_forward: need equal, nonempty W and A lists");
    for (std::size_t i = 0; i < Ws.size(); ++i) {
        if (Ws[i].rows() != Ws[i].cols() || Ws[i].rows() != B.rows()) {
            throw DimensionError("solve_forward: W_" + std::to_string(i) + " must be " + std::to_string(B.rows()) +
                                 "x" + std::to_string(B.rows()));
        }
        if (As[i]->n() != B.cols()) {
            throw DimensionError("solve_forward: A_" + std::to_string(i) + " must be " + std::to_string(B.cols()) +
                                 "x" + std::to_string(B.cols()));
        }
    }
}

}  // namespace

EquilibriumSolution solve_forward_hetero(const std::vector<DenseMatrix>& Ws,
                                         const std::vector<const SparseAdjacency*>& As, const DenseMatrix& B,
                                         const ActivationMap& phi, const SolveOptions& opts, const DenseMatrix* x0) {
    check_shapes(Ws, As, B);
    if (x0 && !x0->same_shape(B)) throw DimensionError("solve_forward: warm start has the wrong shape");

    EquilibriumSolution sol;
    sol.X = x0 ? *x0 : DenseMatrix(B.rows(), B.cols());
    for (std::size_t t = 0;; ++t) {
        DenseMatrix Z;
        DenseMatrix next;
        try {
            Z = aggregate(Ws, As, sol.X);
            Z += B;
            next = phi.apply(Z);
        } catch (const std::overflow_error&) {
            throw NonConvergence("forward solve diverged at iteration " + std::to_string(t), sol.X,
                                 sol.residuals);
        }
        const double r = max_abs_diff(next, sol.X);
        sol.residuals.push_back(r);
        if (r <= opts.tol) {
            sol.D = phi.derivative(Z);
            sol.iterations = t;
            return sol;
        }
        if (t == opts.max_iter) {
            throw NonConvergence("forward solve did not converge in " + std::to_string(opts.max_iter) +
                                     " iterations (residual " + std::to_string(r) + ")",
                                 std::move(sol.X), std::move(sol.residuals));
        }
        sol.X = std::move(next);
    }
}

EquilibriumSolution solve_forward_hetero(const std::vector<DenseMatrix>& Ws,
                                         const std::vector<const SparseAdjacency*>& As,
                                         const std::vector<DenseMatrix>& Bs, const ActivationMap& phi,
                                         const SolveOptions& opts, const DenseMatrix* x0) {
    if (Bs.empty() || Bs.size() != Ws.size()) throw DimensionError("solve_forward_hetero: need one B per relation");
    DenseMatrix total = Bs.front();
    for (std::size_t i = 1; i < Bs.size(); ++i) total += Bs[i];
    return solve_forward_hetero(Ws, As, total, phi, opts, x0);
}

EquilibriumSolution solve_forward(const DenseMatrix& W, const SparseAdjacency& A, const DenseMatrix& B,
                                  const ActivationMap& phi, const SolveOptions& opts, const DenseMatrix* x0) {
    return solve_forward_hetero(std::vector<DenseMatrix>{W}, {&A}, B, phi, opts, x0);
}

}  // namespace ignn
