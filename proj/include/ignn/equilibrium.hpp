#pragma once

// Picard iteration for the equilibrium X = phi(sum_i W_i X A_i + B).

#include <vector>

#include "ignn/activation.hpp"
#include "ignn/linalg.hpp"

namespace ignn {

struct SolveOptions {
    double tol = 1e-6;  // max |entry| of phi(Z(X)) - X
    std::size_t max_iter = 300;

    friend bool operator==(const SolveOptions&, const SolveOptions&) = default;
};

struct EquilibriumSolution {
    DenseMatrix X;
    DenseMatrix D;  // phi'(Z) at the returned X, Z = sum_i W_i X A_i + B
    // residuals[t] = max|phi(Z(X_t)) - X_t|; the last entry is <= tol.
    std::vector<double> residuals;
    std::size_t iterations = 0;  // index t of the returned iterate X_t
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::string what, DenseMatrix last, std::vector<double> residuals);

    // Iterate X_t whose residual is residuals().back().
    const DenseMatrix& last_iterate() const { return last_; }
    const std::vector<double>& residuals() const { return residuals_; }
    double last_residual() const { return residuals_.empty() ? 0.0 : residuals_.back(); }

    // Rethrown by callers with added context (layer index, epoch).
    NonConvergence with_context(const std::string& prefix) const;

private:
    DenseMatrix last_;
    std::vector<double> residuals_;
};

EquilibriumSolution solve_forward(const DenseMatrix& W, const SparseAdjacency& A, const DenseMatrix& B,
                                  const ActivationMap& phi, const SolveOptions& opts = {},
                                  const DenseMatrix* x0 = nullptr);

EquilibriumSolution solve_forward_hetero(const std::vector<DenseMatrix>& Ws,
                                         const std::vector<const SparseAdjacency*>& As,
                                         const std::vector<DenseMatrix>& Bs, const ActivationMap& phi,
                                         const SolveOptions& opts = {}, const DenseMatrix* x0 = nullptr);

// Same as above with the offsets already summed.
EquilibriumSolution solve_forward_hetero(const std::vector<DenseMatrix>& Ws,
                                         const std::vector<const SparseAdjacency*>& As, const DenseMatrix& B,
                                         const ActivationMap& phi, const SolveOptions& opts = {},
                                         const DenseMatrix* x0 = nullptr);

// sum_i W_i X A_i
DenseMatrix aggregate(const std::vector<DenseMatrix>& Ws, const std::vector<const SparseAdjacency*>& As,
                      const DenseMatrix& X);

}  // namespace ignn
