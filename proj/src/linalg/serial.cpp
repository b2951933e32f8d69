// Straightforward single-threaded products. Kept as the reference the
// parallel kernels are tested against.

#include "ignn/linalg.hpp"

namespace ignn::serial {

DenseMatrix matmul(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.cols() != rhs.rows()) throw DimensionError("serial::matmul: inner dimensions differ");
    DenseMatrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i)
        for (std::size_t p = 0; p < lhs.cols(); ++p) {
            const double a = lhs(i, p);
            for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(p, j);
        }
    return out;
}

// Scatter form: walk the rows of A and push contributions into the output.
DenseMatrix rmul_sparse(const DenseMatrix& x, const SparseAdjacency& a) {
    if (x.cols() != a.n()) throw DimensionError("serial::rmul_sparse: X.cols != A.n");
    DenseMatrix out(x.rows(), a.n());
    auto ptr = a.row_ptr();
    auto idx = a.col_idx();
    auto val = a.values();
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < a.n(); ++k)
            for (std::size_t e = ptr[k]; e < ptr[k + 1]; ++e) out(r, idx[e]) += x(r, k) * val[e];
    return out;
}

DenseMatrix rmul_sparse_t(const DenseMatrix& x, const SparseAdjacency& a) {
    if (x.cols() != a.n()) throw DimensionError("serial::rmul_sparse_t: X.cols != A.n");
    DenseMatrix out(x.rows(), a.n());
    auto ptr = a.t_row_ptr();
    auto idx = a.t_col_idx();
    auto val = a.t_values();
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < a.n(); ++k)
            for (std::size_t e = ptr[k]; e < ptr[k + 1]; ++e) out(r, idx[e]) += x(r, k) * val[e];
    return out;
}

}  // namespace ignn::serial
