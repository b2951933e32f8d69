// OpenMP product kernels. Every output entry is owned by exactly one thread and
// accumulated in ascending inner index, matching the serial:: reference bit for bit.

#include "ignn/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace ignn {
namespace {

constexpr std::ptrdiff_t kColBlock = 256;
// Below this many multiply-adds the parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;

void require_finite(const DenseMatrix& m, const char* what) {
    if (!m.all_finite()) throw std::overflow_error(std::string(what) + ": non-finite result");
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw DimensionError("matmul: " + std::to_string(lhs.rows()) + "x" + std::to_string(lhs.cols()) + " * " +
                             std::to_string(rhs.rows()) + "x" + std::to_string(rhs.cols()));
    }
    const auto m = static_cast<std::ptrdiff_t>(lhs.rows());
    const auto k = static_cast<std::ptrdiff_t>(lhs.cols());
    const auto n = static_cast<std::ptrdiff_t>(rhs.cols());
    DenseMatrix out(lhs.rows(), rhs.cols());
    const std::ptrdiff_t blocks = (n + kColBlock - 1) / kColBlock;
    const double* a = lhs.data();
    const double* b = rhs.data();
    double* c = out.data();
    const bool parallel = static_cast<std::size_t>(m) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n) >= kParallelWork;

#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
            const std::ptrdiff_t j0 = blk * kColBlock;
            const std::ptrdiff_t j1 = std::min(n, j0 + kColBlock);
            double* crow = c + i * n;
            for (std::ptrdiff_t p = 0; p < k; ++p) {
                const double aip = a[i * k + p];
                const double* brow = b + p * n;
                for (std::ptrdiff_t j = j0; j < j1; ++j) crow[j] += aip * brow[j];
            }
        }
    }
    require_finite(out, "matmul");
    return out;
}

DenseMatrix matmul_tn(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.rows() != rhs.rows()) throw DimensionError("matmul_tn: row counts differ");
    const auto m = static_cast<std::ptrdiff_t>(lhs.cols());
    const auto k = static_cast<std::ptrdiff_t>(lhs.rows());
    const auto n = static_cast<std::ptrdiff_t>(rhs.cols());
    DenseMatrix out(lhs.cols(), rhs.cols());
    const double* a = lhs.data();
    const double* b = rhs.data();
    double* c = out.data();
    const bool parallel = static_cast<std::size_t>(m) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n) >= kParallelWork;

#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::ptrdiff_t p = 0; p < k; ++p) {
            const double api = a[p * m + i];
            const double* brow = b + p * n;
            for (std::ptrdiff_t j = 0; j < n; ++j) crow[j] += api * brow[j];
        }
    }
    require_finite(out, "matmul_tn");
    return out;
}

DenseMatrix matmul_nt(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.cols() != rhs.cols()) throw DimensionError("matmul_nt: column counts differ");
    const auto m = static_cast<std::ptrdiff_t>(lhs.rows());
    const auto k = static_cast<std::ptrdiff_t>(lhs.cols());
    const auto n = static_cast<std::ptrdiff_t>(rhs.rows());
    DenseMatrix out(lhs.rows(), rhs.rows());
    const double* a = lhs.data();
    const double* b = rhs.data();
    double* c = out.data();
    const bool parallel = static_cast<std::size_t>(m) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n) >= kParallelWork;

#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            const double* arow = a + i * k;
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::ptrdiff_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            c[i * n + j] = acc;
        }
    }
    require_finite(out, "matmul_nt");
    return out;
}

namespace {

// out[r, j] = sum over (src, w) in row j of the given CSR of x[r, src] * w
DenseMatrix gather_rows(const DenseMatrix& x, std::size_t n, std::span<const std::size_t> ptr,
                        std::span<const std::size_t> idx, std::span<const double> val) {
    const auto m = static_cast<std::ptrdiff_t>(x.rows());
    const auto cols = static_cast<std::ptrdiff_t>(n);
    DenseMatrix out(x.rows(), n);
    const double* xd = x.data();
    double* od = out.data();
    const bool parallel = x.rows() * (val.size() + n) >= kParallelWork;

#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t r = 0; r < m; ++r) {
        for (std::ptrdiff_t j = 0; j < cols; ++j) {
            const double* xrow = xd + r * cols;
            double acc = 0.0;
            for (std::size_t e = ptr[static_cast<std::size_t>(j)]; e < ptr[static_cast<std::size_t>(j) + 1]; ++e) {
                acc += xrow[idx[e]] * val[e];
            }
            od[r * cols + j] = acc;
        }
    }
    return out;
}

}  // namespace

DenseMatrix rmul_sparse(const DenseMatrix& x, const SparseAdjacency& a) {
    if (x.cols() != a.n()) throw DimensionError("rmul_sparse: X.cols != A.n");
    // Column j of A is row j of A^T.
    DenseMatrix out = gather_rows(x, a.n(), a.t_row_ptr(), a.t_col_idx(), a.t_values());
    require_finite(out, "rmul_sparse");
    return out;
}

DenseMatrix rmul_sparse_t(const DenseMatrix& x, const SparseAdjacency& a) {
    if (x.cols() != a.n()) throw DimensionError("rmul_sparse_t: X.cols != A.n");
    DenseMatrix out = gather_rows(x, a.n(), a.row_ptr(), a.col_idx(), a.values());
    require_finite(out, "rmul_sparse_t");
    return out;
}

}  // namespace ignn
