#include <algorithm>
#include <cmath>

#include "ignn/wellposed.hpp"

namespace ignn {

Rescaling rescale(const DenseMatrix& W) {
    if (W.rows() != W.cols()) throw DimensionError("rescale: W must be square");
    const std::size_t m = W.rows();
    DenseMatrix absW = abs(W);
    PfOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 200000;

    Rescaling out;
    PfResult pf = pf_eigen(absW, opts);
    out.lambda_pf_absW = pf.lambda;

    auto normalized = [](std::vector<double> v) {
        const double top = *std::max_element(v.begin(), v.end());
        for (double& x : v) x /= top;
        return v;
    };
    std::vector<double> v = m ? normalized(pf.vector) : std::vector<double>{};
    if (m && (pf.nilpotent || *std::min_element(v.begin(), v.end()) < 1e-8)) {
        // Reducible or nilpotent |W|: a positive perturbation makes the PF vector strictly positive.
        const double eps = 1e-10 * std::max(1.0, max_abs(W));
        for (double& x : absW.values()) x += eps;
        pf = pf_eigen(absW, opts);
        v = normalized(pf.vector);
        out.regularized = true;
        if (*std::min_element(v.begin(), v.end()) < 1e-12) {
            throw RescaleError("rescale: PF eigenvector of |W| has entries below 1e-12 after regularization");
        }
    }
    out.pf_vector = v;
    out.scale.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.scale[i] = 1.0 / v[i];
    out.W = DenseMatrix(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) out.W(i, j) = W(i, j) * v[j] / v[i];
    return out;
}

DenseMatrix scale_columns_inverse(const DenseMatrix& M, const std::vector<double>& s) {
    if (M.cols() != s.size()) throw DimensionError("scale_columns_inverse: size mismatch");
    DenseMatrix out = M;
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) = M(i, j) / s[j];
    return out;
}

DenseMatrix scale_rows(const DenseMatrix& M, const std::vector<double>& s) {
    if (M.rows() != s.size()) throw DimensionError("scale_rows: size mismatch");
    DenseMatrix out = M;
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (double& x : out.row(i)) x *= s[i];
    return out;
}

}  // namespace ignn
