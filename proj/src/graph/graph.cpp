#include "ignn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ignn {

void HeteroGraph::validate() const {
    if (relations.empty()) throw std::invalid_argument("HeteroGraph: at least one relation required");
    for (const auto& r : relations) {
        if (r.adjacency.n() != n) {
            throw DimensionError("HeteroGraph: relation '" + r.name + "' has dimension " +
                                 std::to_string(r.adjacency.n()) + ", expected " + std::to_string(n));
        }
    }
}

std::size_t NodeDataset::num_nodes() const {
    return std::visit([](const auto& g) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Graph>) return g.n();
        else return g.n;
    }, graph);
}

std::vector<const SparseAdjacency*> NodeDataset::adjacencies() const {
    std::vector<const SparseAdjacency*> out;
    if (const auto* g = std::get_if<Graph>(&graph)) {
        out.push_back(&g->adjacency);
    } else {
        for (const auto& r : std::get<HeteroGraph>(graph).relations) out.push_back(&r.adjacency);
    }
    return out;
}

void NodeDataset::validate(bool multiclass) const {
    const std::size_t n = num_nodes();
    if (const auto* h = std::get_if<HeteroGraph>(&graph)) h->validate();
    if (features && features->cols() != n) {
        throw DimensionError("dataset: features describe " + std::to_string(features->cols()) + " nodes, graph has " +
                             std::to_string(n));
    }
    if (labels.cols() != n) {
        throw DimensionError("dataset: labels describe " + std::to_string(labels.cols()) + " nodes, graph has " +
                             std::to_string(n));
    }
    std::vector<int> owner(n, -1);
    const std::vector<std::size_t>* sets[] = {&splits.train, &splits.val, &splits.test};
    for (int s = 0; s < 3; ++s) {
        for (std::size_t id : *sets[s]) {
            if (id >= n) throw std::invalid_argument("dataset: split id " + std::to_string(id) + " out of range");
            if (owner[id] != -1) throw std::invalid_argument("dataset: node " + std::to_string(id) + " in two splits");
            owner[id] = s;
        }
    }
    if (multiclass) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < labels.rows(); ++c) s += labels(c, j);
            if (s != 1.0 && owner[j] != -1) {
                throw std::invalid_argument("dataset: label column " + std::to_string(j) + " is not one-hot");
            }
        }
    }
}

SparseAdjacency renormalize(const SparseAdjacency& a) {
    const std::size_t n = a.n();
    auto triplets = a.triplets();
    for (std::size_t i = 0; i < n; ++i) triplets.push_back({i, i, 1.0});
    const SparseAdjacency with_loops = SparseAdjacency::from_triplets(n, std::move(triplets));
    std::vector<double> degree(n, 0.0);
    auto ptr = with_loops.t_row_ptr();
    auto tval = with_loops.t_values();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t e = ptr[j]; e < ptr[j + 1]; ++e) degree[j] += tval[e];
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

    std::vector<std::size_t> row_ptr(with_loops.row_ptr().begin(), with_loops.row_ptr().end());
    std::vector<std::size_t> col_idx(with_loops.col_idx().begin(), with_loops.col_idx().end());
    std::vector<double> values(with_loops.values().begin(), with_loops.values().end());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) values[e] *= inv_sqrt[i] * inv_sqrt[col_idx[e]];
    return SparseAdjacency(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

Graph renormalize(const Graph& g) { return Graph{renormalize(g.adjacency), g.directed}; }

HeteroGraph renormalize(const HeteroGraph& g) {
    HeteroGraph out{g.n, {}};
    for (const auto& r : g.relations) out.relations.push_back({r.name, renormalize(r.adjacency)});
    return out;
}

NodeDataset gen_chains(const ChainsOptions& opts) {
    const std::size_t per_chain = opts.length + 1;
    const std::size_t chains = 2 * opts.chains_per_class;
    const std::size_t n = chains * per_chain;
    if (opts.train + opts.val + opts.test > n) {
        throw std::invalid_argument("gen_chains: splits " + std::to_string(opts.train) + "/" + std::to_string(opts.val) +
                                    "/" + std::to_string(opts.test) + " exceed " + std::to_string(n) + " nodes");
    }
    if (opts.feature_dim == 0) throw std::invalid_argument("gen_chains: feature_dim must be positive");

    std::vector<SparseAdjacency::Triplet> edges;
    edges.reserve(chains * opts.length);
    DenseMatrix features(opts.feature_dim, n);
    DenseMatrix labels(2, n);
    for (std::size_t c = 0; c < chains; ++c) {
        const std::size_t cls = c < opts.chains_per_class ? 0 : 1;
        const std::size_t start = c * per_chain;
        for (std::size_t k = 0; k < per_chain; ++k) labels(cls, start + k) = 1.0;
        for (std::size_t k = 0; k + 1 < per_chain; ++k) edges.push_back({start + k, start + k + 1, 1.0});
        if (cls == 1) features(0, start) = 1.0;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opts.seed);
    std::shuffle(order.begin(), order.end(), rng);
    Splits splits;
    auto take = [&](std::size_t from, std::size_t count) {
        std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(from),
                                     order.begin() + static_cast<std::ptrdiff_t>(from + count));
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    splits.train = take(0, opts.train);
    splits.val = take(opts.train, opts.val);
    splits.test = take(opts.train + opts.val, opts.test);

    NodeDataset ds{Graph{SparseAdjacency::from_triplets(n, std::move(edges)), true}, std::move(features),
                   std::move(labels), std::move(splits)};
    return ds;
}

}  // namespace ignn
