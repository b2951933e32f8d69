// Serial reference kernels against the OpenMP ones, plus one forward solve.

#include <benchmark/benchmark.h>

#include <random>

#include "ignn/equilibrium.hpp"
#include "ignn/graph.hpp"
#include "ignn/linalg.hpp"

using namespace ignn;

namespace {

DenseMatrix random_dense(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    DenseMatrix m(r, c);
    for (double& v : m.values()) v = d(rng);
    return m;
}

// Undirected graph with about `degree` random neighbours per node, renormalized.
SparseAdjacency random_graph(std::size_t n, std::size_t degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<SparseAdjacency::Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < degree; ++k) {
            const std::size_t j = pick(rng);
            t.push_back({i, j, 1.0});
            t.push_back({j, i, 1.0});
        }
    return renormalize(SparseAdjacency::from_triplets(n, std::move(t), SparseAdjacency::Duplicates::collapse_to_one));
}

template <DenseMatrix (*Kernel)(const DenseMatrix&, const DenseMatrix&)>
void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const DenseMatrix a = random_dense(64, n, 1), b = random_dense(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(64 * n * n));
}

template <DenseMatrix (*Kernel)(const DenseMatrix&, const SparseAdjacency&)>
void BM_rmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SparseAdjacency A = random_graph(n, 5, 3);
    const DenseMatrix X = random_dense(32, n, 4);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(X, A));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(32 * A.nnz()));
}

void BM_forward_solve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SparseAdjacency A = random_graph(n, 5, 5);
    DenseMatrix W = random_dense(32, 32, 6);
    W *= 0.9 / (inf_norm(W) * A.pf_eigenvalue());
    const DenseMatrix B = random_dense(32, n, 7);
    std::size_t iters = 0;
    for (auto _ : state) {
        auto sol = solve_forward(W, A, B, Activation::relu());
        iters = sol.iterations;
        benchmark::DoNotOptimize(sol.X);
    }
    state.counters["picard_iters"] = static_cast<double>(iters);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_matmul, serial::matmul)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->Name("matmul/serial");
BENCHMARK_TEMPLATE(BM_matmul, matmul)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->Name("matmul/openmp");
BENCHMARK_TEMPLATE(BM_rmul, serial::rmul_sparse)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->Name("rmul_sparse/serial");
BENCHMARK_TEMPLATE(BM_rmul, rmul_sparse)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->Name("rmul_sparse/openmp");
BENCHMARK_TEMPLATE(BM_rmul, serial::rmul_sparse_t)->Arg(100000)->Unit(benchmark::kMillisecond)->Name("rmul_sparse_t/serial");
BENCHMARK_TEMPLATE(BM_rmul, rmul_sparse_t)->Arg(100000)->Unit(benchmark::kMillisecond)->Name("rmul_sparse_t/openmp");
BENCHMARK(BM_forward_solve)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
