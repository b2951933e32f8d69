#include "ignn/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ignn {

SparseAdjacency::SparseAdjacency(std::size_t n)
    : n_(n), row_ptr_(n + 1, 0), pf_cache_(std::make_shared<PfCache>()) {
    build_transpose_and_norms();
}

SparseAdjacency::SparseAdjacency(std::size_t n, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> col_idx, std::vector<double> values)
    : n_(n),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      pf_cache_(std::make_shared<PfCache>()) {
    if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0) {
        throw std::invalid_argument("SparseAdjacency: row_ptr must have n+1 entries starting at 0");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_ptr_[i + 1] < row_ptr_[i]) throw std::invalid_argument("SparseAdjacency: row_ptr not monotone");
    }
    if (row_ptr_[n_] != col_idx_.size() || col_idx_.size() != values_.size()) {
        throw std::invalid_argument("SparseAdjacency: row_ptr[n] != nnz");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= n_) throw std::invalid_argument("SparseAdjacency: column index out of range");
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                throw std::invalid_argument("SparseAdjacency: column indices must be strictly increasing per row");
            }
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("SparseAdjacency: entries must be finite and >= 0");
    }
    build_transpose_and_norms();
}

SparseAdjacency SparseAdjacency::from_triplets(std::size_t n, std::vector<Triplet> triplets, Duplicates dup) {
    for (const auto& t : triplets) {
        if (t.row >= n || t.col >= n) throw std::invalid_argument("from_triplets: index out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        const double v = dup == Duplicates::collapse_to_one ? 1.0 : t.value;
        if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
            switch (dup) {
                case Duplicates::sum: values.back() += v; break;
                case Duplicates::collapse_to_one: break;
                case Duplicates::keep_max: values.back() = std::max(values.back(), v); break;
            }
            continue;
        }
        col_idx.push_back(t.col);
        values.push_back(v);
        ++row_ptr[t.row + 1];
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
    return SparseAdjacency(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseAdjacency SparseAdjacency::from_dense(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("from_dense: matrix must be square");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) t.push_back({i, j, m(i, j)});
    return from_triplets(m.rows(), std::move(t));
}

SparseAdjacency SparseAdjacency::identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
    for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
    return SparseAdjacency(n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

void SparseAdjacency::build_transpose_and_norms() {
    // Counting sort by column keeps source rows ascending within each column.
    t_row_ptr_.assign(n_ + 1, 0);
    for (std::size_t c : col_idx_) ++t_row_ptr_[c + 1];
    for (std::size_t j = 0; j < n_; ++j) t_row_ptr_[j + 1] += t_row_ptr_[j];
    t_col_idx_.resize(col_idx_.size());
    t_values_.resize(values_.size());
    std::vector<std::size_t> cursor(t_row_ptr_.begin(), t_row_ptr_.end() - 1);
    std::vector<double> col_sums(n_, 0.0);
    inf_norm_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double row_sum = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t j = col_idx_[k];
            t_col_idx_[cursor[j]] = i;
            t_values_[cursor[j]] = values_[k];
            ++cursor[j];
            row_sum += values_[k];
            col_sums[j] += values_[k];
        }
        inf_norm_ = std::max(inf_norm_, row_sum);
    }
    one_norm_ = 0.0;
    for (double s : col_sums) one_norm_ = std::max(one_norm_, s);
}

double SparseAdjacency::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("SparseAdjacency::at");
    auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

double SparseAdjacency::pf_eigenvalue() const {
    std::call_once(pf_cache_->once, [this] { pf_cache_->value = pf_eigen(*this).lambda; });
    return pf_cache_->value;
}

SparseAdjacency SparseAdjacency::transposed() const {
    return SparseAdjacency(n_, t_row_ptr_, t_col_idx_, t_values_);
}

DenseMatrix SparseAdjacency::to_dense() const {
    DenseMatrix d(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) = values_[k];
    return d;
}

std::vector<SparseAdjacency::Triplet> SparseAdjacency::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_idx_[k], values_[k]});
    return out;
}

bool SparseAdjacency::is_symmetric(double tol) const {
    if (t_row_ptr_ != row_ptr_ || t_col_idx_ != col_idx_) return false;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (std::fabs(values_[k] - t_values_[k]) > tol) return false;
    }
    return true;
}

}  // namespace ignn
