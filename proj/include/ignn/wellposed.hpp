#pragma once

// Well-posedness checks for (W, A) pairs, the convex training-time constraint
// ||W||_inf <= kappa / lambda_pf(A) with its row-wise L1-ball projection, and
// the diagonal rescaling that turns a PF-feasible W into a norm-feasible one.

#include <limits>
#include <string>
#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

struct WellPosedReport {
    double lambda_pf_A = 0.0;
    double lambda_pf_absW = 0.0;
    double product = 0.0;       // lambda_pf_A * lambda_pf_absW
    double inf_norm_W = 0.0;
    // Heterogeneous case: sum_i ||A_i||_1 ||W_i||_inf and, when materialized,
    // lambda_pf(sum_i |A_i^T kron W_i|).
    double tractable_bound = 0.0;
    double kron_pf = 0.0;
    bool kron_pf_computed = false;

    bool pf_holds = false;
    bool tractable_holds = false;
    std::vector<std::string> condition_notes;
};

// pf_holds <=> lambda_pf(A) lambda_pf(|W|) < 1;
// tractable_holds <=> ||W||_inf < 1 / lambda_pf(A).
WellPosedReport check(const DenseMatrix& W, const SparseAdjacency& A);

// N = 1 defers to check(). Otherwise tractable_holds <=> sum_i ||A_i||_1 ||W_i||_inf <= kappa,
// and the exact PF condition is evaluated on the materialized Kronecker sum when m n <= 400.
WellPosedReport check_hetero(const std::vector<DenseMatrix>& Ws, const std::vector<const SparseAdjacency*>& As,
                             double kappa);

std::string format_report(const WellPosedReport& r);

struct ConstraintSpec {
    double kappa = 0.95;
    double radius = std::numeric_limits<double>::infinity();
    // Heterogeneous layers: kappa_i and radius_i = kappa_i / ||A_i||_1 per relation.
    std::vector<double> relation_kappas;
    std::vector<double> relation_radii;

    // Sum of the relation kappas is below one (certified regime).
    bool certified() const;

    // radius = kappa / lambda_pf(A), +inf when lambda_pf(A) = 0.
    static ConstraintSpec for_graph(double kappa, const SparseAdjacency& A);
    static ConstraintSpec for_relations(const std::vector<double>& kappas,
                                        const std::vector<const SparseAdjacency*>& As);
};

// Euclidean projection onto {u : ||u||_1 <= r} by sort-and-threshold.
std::vector<double> l1_ball_project(std::span<const double> v, double r);
void l1_ball_project_inplace(std::span<double> v, double r);

// Each row projected independently onto the L1 ball of the given radius.
DenseMatrix project_W(const DenseMatrix& W, double radius);
DenseMatrix project_W(const DenseMatrix& W, const ConstraintSpec& spec);
// Relation-wise projection using spec.relation_radii.
std::vector<DenseMatrix> project_relations(const std::vector<DenseMatrix>& Ws, const ConstraintSpec& spec);

struct Rescaling {
    DenseMatrix W;               // S W S^{-1}
    std::vector<double> scale;   // diagonal of S (= 1 / v)
    std::vector<double> pf_vector;  // right PF eigenvector v of |W|, max entry 1
    double lambda_pf_absW = 0.0;
    bool regularized = false;
};

class RescaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// S = diag(v)^{-1} with v the right PF eigenvector of |W|, so every row sum of
// |S W S^{-1}| equals lambda_pf(|W|). When v has (near) zero entries, |W| is
// regularized with a small positive perturbation before the eigen-solve.
Rescaling rescale(const DenseMatrix& W);

// Apply a diagonal scaling s to the head side: Theta' = Theta diag(s)^{-1}.
DenseMatrix scale_columns_inverse(const DenseMatrix& M, const std::vector<double>& s);
// Omega' = diag(s) Omega.
DenseMatrix scale_rows(const DenseMatrix& M, const std::vector<double>& s);

}  // namespace ignn
