#include "ignn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace ignn {

PfNonConvergence::PfNonConvergence(double last_estimate, std::size_t iterations)
    : std::runtime_error("pf_eigen: no convergence after " + std::to_string(iterations) +
                         " iterations (last estimate " + std::to_string(last_estimate) + ")"),
      last_estimate_(last_estimate),
      iterations_(iterations) {}

namespace {

template <class Successors>
bool acyclic(std::size_t n, Successors&& successors) {
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i) successors(i, [&](std::size_t j) { ++indegree[j]; });
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);
    std::size_t seen = 0;
    while (!ready.empty()) {
        const std::size_t i = ready.front();
        ready.pop();
        ++seen;
        successors(i, [&](std::size_t j) {
            if (--indegree[j] == 0) ready.push(j);
        });
    }
    return seen == n;
}

PfResult nilpotent_result(std::size_t n) {
    PfResult r;
    r.lambda = 0.0;
    r.nilpotent = true;
    r.vector.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    return r;
}

// Power iteration on S + c*I with c = max(shift, ||S||_inf / 2). With only the
// small shift a bipartite or cyclic pattern converges at rate ~(1 - shift/lambda),
// far too slow for max_iter; half the row-sum bound keeps the rate well below 1.
// Estimates are clamped to [0, ||S||_inf], which always bounds lambda.
// Stops when the Collatz-Wielandt bracket
// [min (Mv)_i/v_i, max (Mv)_i/v_i] closes, or, for reducible matrices where it
// cannot, when both the eigenvalue estimate and the iterate have settled.
template <class MatVec>
PfResult power_iterate(std::size_t n, MatVec&& matvec, double row_bound, const PfOptions& opts) {
    if (n == 0) return nilpotent_result(0);
    const double shift = std::max(opts.shift, 0.5 * row_bound);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) total += (x = dist(rng));
    for (double& x : v) x /= total;

    std::vector<double> y(n);
    std::vector<double> z(n);
    double previous = -1.0;
    double estimate = 0.0;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        matvec(v, y);
        double ysum = 0.0;
        for (double x : y) ysum += x;
        if (ysum < 1e-300) {
            auto r = nilpotent_result(n);
            r.iterations = it;
            return r;
        }
        double lower = std::numeric_limits<double>::infinity();
        double upper = 0.0;
        bool bracket = true;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = y[i] + shift * v[i];
            if (v[i] > 0.0) {
                const double ratio = z[i] / v[i];
                lower = std::min(lower, ratio);
                upper = std::max(upper, ratio);
            } else {
                bracket = false;
            }
        }
        const double zsum = ysum + shift;
        estimate = zsum - shift;
        const double scale = std::max(1.0, estimate);
        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = z[i] / zsum;
            step += std::fabs(next - v[i]);
            v[i] = next;
        }
        if (bracket && upper - lower <= opts.tol * scale) {
            PfResult r;
            r.lambda = std::clamp(0.5 * (upper + lower) - shift, 0.0, row_bound);
            r.vector = std::move(v);
            r.iterations = it;
            return r;
        }
        if (std::fabs(estimate - previous) <= opts.tol * scale && step <= opts.tol) {
            PfResult r;
            r.lambda = std::clamp(estimate, 0.0, row_bound);
            r.vector = std::move(v);
            r.iterations = it;
            return r;
        }
        previous = estimate;
    }
    throw PfNonConvergence(estimate, opts.max_iter);
}

}  // namespace

bool pattern_is_acyclic(const SparseAdjacency& s) {
    auto ptr = s.row_ptr();
    auto idx = s.col_idx();
    auto val = s.values();
    return acyclic(s.n(), [&](std::size_t i, auto&& visit) {
        for (std::size_t e = ptr[i]; e < ptr[i + 1]; ++e)
            if (val[e] != 0.0) visit(idx[e]);
    });
}

bool pattern_is_acyclic(const DenseMatrix& s) {
    return acyclic(s.rows(), [&](std::size_t i, auto&& visit) {
        for (std::size_t j = 0; j < s.cols(); ++j)
            if (s(i, j) != 0.0) visit(j);
    });
}

PfResult pf_eigen(const DenseMatrix& s, const PfOptions& opts) {
    if (s.rows() != s.cols()) throw DimensionError("pf_eigen: matrix must be square");
    for (double v : s.values())
        if (v < 0.0) throw std::invalid_argument("pf_eigen: matrix must be nonnegative");
    if (pattern_is_acyclic(s)) return nilpotent_result(s.rows());
    const std::size_t n = s.rows();
    return power_iterate(n, [&](const std::vector<double>& v, std::vector<double>& y) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            auto row = s.row(i);
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
            y[i] = acc;
        }
    }, inf_norm(s), opts);
}

PfResult pf_eigen(const SparseAdjacency& s, const PfOptions& opts) {
    if (pattern_is_acyclic(s)) return nilpotent_result(s.n());
    auto ptr = s.row_ptr();
    auto idx = s.col_idx();
    auto val = s.values();
    return power_iterate(s.n(), [&](const std::vector<double>& v, std::vector<double>& y) {
        for (std::size_t i = 0; i < s.n(); ++i) {
            double acc = 0.0;
            for (std::size_t e = ptr[i]; e < ptr[i + 1]; ++e) acc += val[e] * v[idx[e]];
            y[i] = acc;
        }
    }, s.inf_norm(), opts);
}

}  // namespace ignn
