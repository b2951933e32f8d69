#include <cmath>
#include <cstdio>
#include <sstream>

#include "ignn/wellposed.hpp"

namespace ignn {
namespace {

// Largest singular value by power iteration on W^T W.
double spectral_norm(const DenseMatrix& W) {
    const std::size_t n = W.cols();
    if (n == 0 || max_abs(W) == 0.0) return 0.0;
    DenseMatrix v(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));
    double sigma2 = 0.0;
    for (int it = 0; it < 5000; ++it) {
        DenseMatrix w = matmul_tn(W, matmul(W, v));
        const double norm = std::sqrt(frobenius_dot(w, w));
        if (norm == 0.0) return 0.0;
        const double prev = sigma2;
        sigma2 = frobenius_dot(v, w);
        v = (1.0 / norm) * w;
        if (std::fabs(sigma2 - prev) <= 1e-14 * std::max(1.0, sigma2)) break;
    }
    return std::sqrt(std::max(0.0, sigma2));
}

// Unweighted and every row and column sum equal to k.
std::optional<double> regular_degree(const SparseAdjacency& A) {
    if (A.n() == 0) return std::nullopt;
    for (double v : A.values())
        if (v != 1.0) return std::nullopt;
    auto ptr = A.row_ptr();
    auto tptr = A.t_row_ptr();
    const std::size_t k = ptr[1] - ptr[0];
    for (std::size_t i = 0; i < A.n(); ++i) {
        if (ptr[i + 1] - ptr[i] != k || tptr[i + 1] - tptr[i] != k) return std::nullopt;
    }
    return static_cast<double>(k);
}

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

WellPosedReport check(const DenseMatrix& W, const SparseAdjacency& A) {
    if (W.rows() != W.cols()) throw DimensionError("check: W must be square");
    WellPosedReport r;
    r.lambda_pf_A = A.pf_eigenvalue();
    r.lambda_pf_absW = pf_eigen(abs(W)).lambda;
    r.product = r.lambda_pf_A * r.lambda_pf_absW;
    r.inf_norm_W = inf_norm(W);
    r.tractable_bound = one_norm(A) * r.inf_norm_W;
    r.pf_holds = r.product < 1.0;
    r.tractable_holds = r.inf_norm_W * r.lambda_pf_A < 1.0;

    if (pattern_is_acyclic(A)) {
        r.condition_notes.push_back("DAG adjacency: lambda_pf(A) = 0, well-posed for every CONE activation");
    }
    if (auto k = regular_degree(A)) {
        const double bound = *k * spectral_norm(W);
        r.condition_notes.push_back("k-regular adjacency (k = " + fmt(*k) + "): k*||W||_2 = " + fmt(bound) +
                                    (bound < 1.0 ? " < 1, well-posed" : " >= 1, regular-graph test inconclusive"));
    }
    if (r.tractable_bound < 1.0) {
        r.condition_notes.push_back("contraction: ||A||_1 ||W||_inf = " + fmt(r.tractable_bound) + " < 1");
    }
    return r;
}

WellPosedReport check_hetero(const std::vector<DenseMatrix>& Ws, const std::vector<const SparseAdjacency*>& As,
                             double kappa) {
    if (Ws.empty() || Ws.size() != As.size()) throw DimensionError("check_hetero: need equal, nonempty lists");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("check_hetero: kappa must lie in [0, 1)");
    if (Ws.size() == 1) return check(Ws.front(), *As.front());

    const std::size_t m = Ws.front().rows();
    const std::size_t n = As.front()->n();
    WellPosedReport r;
    for (std::size_t i = 0; i < Ws.size(); ++i) {
        if (Ws[i].rows() != m || Ws[i].cols() != m || As[i]->n() != n) {
            throw DimensionError("check_hetero: relation " + std::to_string(i) + " has inconsistent shape");
        }
        r.tractable_bound += one_norm(*As[i]) * inf_norm(Ws[i]);
        r.inf_norm_W = std::max(r.inf_norm_W, inf_norm(Ws[i]));
    }
    r.tractable_holds = r.tractable_bound <= kappa;

    if (m * n <= 400) {
        DenseMatrix sum(m * n, m * n);
        for (std::size_t i = 0; i < Ws.size(); ++i) sum += abs(kron_materialize(As[i]->to_dense().transposed(), Ws[i]));
        r.kron_pf = pf_eigen(sum).lambda;
        r.kron_pf_computed = true;
        r.pf_holds = r.kron_pf < 1.0;
        r.condition_notes.push_back("lambda_pf(sum_i |A_i^T kron W_i|) = " + fmt(r.kron_pf));
    } else if (r.tractable_holds) {
        r.pf_holds = true;
        r.condition_notes.push_back("PF condition implied by the tractable bound");
    } else {
        r.condition_notes.push_back("PF condition unknown (instance too large to materialize)");
    }
    r.condition_notes.push_back("sum_i ||A_i||_1 ||W_i||_inf = " + fmt(r.tractable_bound) +
                                (r.tractable_holds ? " <= " : " > ") + "kappa = " + fmt(kappa));
    return r;
}

std::string format_report(const WellPosedReport& r) {
    std::ostringstream os;
    os << "lambda_pf(A)\t" << fmt(r.lambda_pf_A) << '\n'
       << "lambda_pf(|W|)\t" << fmt(r.lambda_pf_absW) << '\n'
       << "product\t" << fmt(r.product) << '\n'
       << "inf_norm(W)\t" << fmt(r.inf_norm_W) << '\n'
       << "tractable_bound\t" << fmt(r.tractable_bound) << '\n';
    if (r.kron_pf_computed) os << "kron_pf\t" << fmt(r.kron_pf) << '\n';
    os << "pf_condition\t" << (r.pf_holds ? "holds" : "fails") << '\n'
       << "tractable_condition\t" << (r.tractable_holds ? "holds" : "fails") << '\n';
    for (const auto& note : r.condition_notes) os << "note\t" << note << '\n';
    return os.str();
}

bool ConstraintSpec::certified() const {
    if (relation_kappas.empty()) return kappa < 1.0;
    double s = 0.0;
    for (double k : relation_kappas) s += k;
    return s < 1.0;
}

ConstraintSpec ConstraintSpec::for_graph(double kappa, const SparseAdjacency& A) {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in [0, 1)");
    ConstraintSpec s;
    s.kappa = kappa;
    const double lambda = A.pf_eigenvalue();
    s.radius = lambda > 0.0 ? kappa / lambda : std::numeric_limits<double>::infinity();
    return s;
}

ConstraintSpec ConstraintSpec::for_relations(const std::vector<double>& kappas,
                                             const std::vector<const SparseAdjacency*>& As) {
    if (kappas.size() != As.size() || As.empty()) throw std::invalid_argument("for_relations: one kappa per relation");
    if (As.size() == 1) return for_graph(kappas.front(), *As.front());
    ConstraintSpec s;
    s.kappa = 0.0;
    for (std::size_t i = 0; i < As.size(); ++i) {
        const double k = kappas[i];
        if (!(k >= 0.0 && k < 1.0)) throw std::invalid_argument("relation kappa must lie in [0, 1)");
        const double norm = one_norm(*As[i]);
        s.relation_kappas.push_back(k);
        s.relation_radii.push_back(norm > 0.0 ? k / norm : std::numeric_limits<double>::infinity());
        s.kappa += k;
    }
    s.radius = std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace ignn
