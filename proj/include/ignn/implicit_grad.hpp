#pragma once

// Gradients through the equilibrium by implicit differentiation: solve the
// adjoint fixed point G = D .* (sum_i W_i^T G A_i^T + dL/dX), then read the
// parameter gradients off G in closed form.

#include <optional>
#include <vector>

#include "ignn/equilibrium.hpp"
#include "ignn/offset.hpp"

namespace ignn {

struct AdjointSolution {
    DenseMatrix G;                   // dL/dZ
    std::vector<double> residuals;   // residuals[t] = max|D .* (W^T G_t A^T + gX) - G_t|
    std::size_t iterations = 0;
};

AdjointSolution solve_backward(const DenseMatrix& W, const SparseAdjacency& A, const DenseMatrix& D,
                               const DenseMatrix& grad_X, const SolveOptions& opts = {});

AdjointSolution solve_backward_hetero(const std::vector<DenseMatrix>& Ws,
                                      const std::vector<const SparseAdjacency*>& As, const DenseMatrix& D,
                                      const DenseMatrix& grad_X, const SolveOptions& opts = {});

struct GradientBundle {
    // One RelationParams-shaped gradient per relation (W, omega_a, omega_b).
    std::vector<RelationParams> grad;
    std::optional<DenseMatrix> grad_U;
    DenseMatrix grad_Z;
    std::size_t iterations = 0;
};

// Closed-form gradients given dL/dZ from a converged adjoint solve:
//   dW_i = G A_i^T X^T,  dOmega_a = G A_i^T U^T,  dOmega_b = G U^T,
//   dU   = sum_i Omega_a^T G A_i^T + Omega_b^T G.
GradientBundle param_grads(const DenseMatrix& grad_Z, const DenseMatrix& X,
                           const std::vector<const SparseAdjacency*>& As, const DenseMatrix& U,
                           const std::vector<RelationParams>& relations, BForm form, bool want_grad_U = true);

}  // namespace ignn
