#pragma once

// Dense and sparse matrix primitives used by every other part of the engine.
//
// DenseMatrix is a row-major block of doubles. SparseAdjacency is a square,
// nonnegative CSR matrix that also keeps the CSR form of its transpose so that
// both X*A and X*A^T reduce to gathers over contiguous index ranges.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ignn {

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    // Throws std::invalid_argument if data.size() != rows*cols or any entry is not finite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

    DenseMatrix transposed() const;
    DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& src);

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s);

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator*(double s, DenseMatrix m);

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix abs(const DenseMatrix& m);
// axpy: y += alpha * x
void axpy(double alpha, const DenseMatrix& x, DenseMatrix& y);

// Largest |entry|; the norm used for fixed-point residuals on vec(X).
double max_abs(const DenseMatrix& m);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
// Entrywise sum of |entry| (l1 norm of vec(M)).
double entry_l1(const DenseMatrix& m);
double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b);

// Column-stacking vectorization, returned as an (rows*cols) x 1 matrix.
DenseMatrix vec(const DenseMatrix& m);
DenseMatrix unvec(const DenseMatrix& v, std::size_t rows, std::size_t cols);

/// Nonnegative square matrix in compressed sparse row form.
///
/// Entry (i, j) lives in row i. The transpose is stored alongside so that a
/// column of A can be walked as a row of A^T with ascending source index.
class SparseAdjacency {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };
    enum class Duplicates { sum, collapse_to_one, keep_max };

    SparseAdjacency() : SparseAdjacency(0) {}
    explicit SparseAdjacency(std::size_t n);  // zero matrix

    // Validates the CSR invariants and nonnegativity; throws std::invalid_argument.
    SparseAdjacency(std::size_t n, std::vector<std::size_t> row_ptr,
                    std::vector<std::size_t> col_idx, std::vector<double> values);

    static SparseAdjacency from_triplets(std::size_t n, std::vector<Triplet> triplets,
                                         Duplicates dup = Duplicates::sum);
    static SparseAdjacency from_dense(const DenseMatrix& m);
    static SparseAdjacency identity(std::size_t n);

    std::size_t n() const { return n_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::size_t> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }

    // CSR arrays of A^T (equivalently CSC of A).
    std::span<const std::size_t> t_row_ptr() const { return t_row_ptr_; }
    std::span<const std::size_t> t_col_idx() const { return t_col_idx_; }
    std::span<const double> t_values() const { return t_values_; }

    double at(std::size_t i, std::size_t j) const;

    // Max column sum; computed at construction.
    double one_norm() const { return one_norm_; }
    // Max row sum.
    double inf_norm() const { return inf_norm_; }
    // Perron-Frobenius eigenvalue with default options, computed once and shared by copies.
    double pf_eigenvalue() const;

    SparseAdjacency transposed() const;
    DenseMatrix to_dense() const;
    std::vector<Triplet> triplets() const;
    bool is_symmetric(double tol = 0.0) const;

private:
    struct PfCache {
        std::once_flag once;
        double value = 0.0;
    };

    void build_transpose_and_norms();

    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
    std::vector<std::size_t> t_row_ptr_;
    std::vector<std::size_t> t_col_idx_;
    std::vector<double> t_values_;
    double one_norm_ = 0.0;
    double inf_norm_ = 0.0;
    std::shared_ptr<PfCache> pf_cache_;
};

inline DenseMatrix densify(const SparseAdjacency& a) { return a.to_dense(); }

// Products. Parallel over output entries with sequential, ascending-index
// accumulation per entry, so results do not depend on the thread count.
DenseMatrix matmul(const DenseMatrix& lhs, const DenseMatrix& rhs);
// lhs^T * rhs without materializing the transpose.
DenseMatrix matmul_tn(const DenseMatrix& lhs, const DenseMatrix& rhs);
// lhs * rhs^T without materializing the transpose.
DenseMatrix matmul_nt(const DenseMatrix& lhs, const DenseMatrix& rhs);
// X * A
DenseMatrix rmul_sparse(const DenseMatrix& x, const SparseAdjacency& a);
// X * A^T
DenseMatrix rmul_sparse_t(const DenseMatrix& x, const SparseAdjacency& a);

double inf_norm(const DenseMatrix& m);
double one_norm(const DenseMatrix& m);
inline double inf_norm(const SparseAdjacency& a) { return a.inf_norm(); }
inline double one_norm(const SparseAdjacency& a) { return a.one_norm(); }

// Test-support Kronecker product; rejects results larger than 10^6 entries.
DenseMatrix kron_materialize(const DenseMatrix& a, const DenseMatrix& b);

// ---------------------------------------------------------------------------
// Perron-Frobenius eigenvalue

struct PfOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10000;
    double shift = 1e-3;  // lower bound; the applied shift is max(shift, ||S||_inf / 2)
    std::uint64_t seed = 0x5eed5eedULL;
};

struct PfResult {
    double lambda = 0.0;
    std::vector<double> vector;  // nonnegative, sums to one
    std::size_t iterations = 0;
    bool nilpotent = false;
};

class PfNonConvergence : public std::runtime_error {
public:
    PfNonConvergence(double last_estimate, std::size_t iterations);
    double last_estimate() const { return last_estimate_; }
    std::size_t iterations() const { return iterations_; }

private:
    double last_estimate_;
    std::size_t iterations_;
};

// Shifted power iteration on S + c*I from a seeded positive start vector.
// A nonzero pattern without directed cycles is nilpotent and short-circuits to 0.
PfResult pf_eigen(const DenseMatrix& s, const PfOptions& opts = {});
PfResult pf_eigen(const SparseAdjacency& s, const PfOptions& opts = {});

// True when the nonzero pattern has no directed cycle (including self-loops).
bool pattern_is_acyclic(const SparseAdjacency& s);
bool pattern_is_acyclic(const DenseMatrix& s);

// Single-threaded reference kernels kept for testing the parallel ones.
namespace serial {
DenseMatrix matmul(const DenseMatrix& lhs, const DenseMatrix& rhs);
DenseMatrix rmul_sparse(const DenseMatrix& x, const SparseAdjacency& a);
DenseMatrix rmul_sparse_t(const DenseMatrix& x, const SparseAdjacency& a);
}  // namespace serial

}  // namespace ignn
