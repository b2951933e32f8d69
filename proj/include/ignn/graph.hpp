#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, const std::string& source = "")
        : std::runtime_error((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + what),
          message_(what),
          line_(line) {}
    std::size_t line() const { return line_; }
    const std::string& message() const { return message_; }
    ParseError in_file(const std::string& source) const { return ParseError(message_, line_, source); }

private:
    std::string message_;
    std::size_t line_;
};

// Entry (i, j) is the weight of edge i -> j, so column j of X*A gathers the
// states of j's in-neighbours.
struct Graph {
    SparseAdjacency adjacency;
    bool directed = true;

    std::size_t n() const { return adjacency.n(); }
};

struct HeteroGraph {
    struct Relation {
        std::string name;
        SparseAdjacency adjacency;
    };

    std::size_t n = 0;
    std::vector<Relation> relations;

    // Throws if the relation list is empty or dimensions disagree.
    void validate() const;
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct NodeDataset {
    std::variant<Graph, HeteroGraph> graph;
    std::optional<DenseMatrix> features;  // p x n; absent means U is learned
    DenseMatrix labels;                   // c x n
    Splits splits;

    std::size_t num_nodes() const;
    std::size_t num_classes() const { return labels.rows(); }
    // Adjacency list in relation order (a single entry for an ordinary graph).
    std::vector<const SparseAdjacency*> adjacencies() const;
    // Checks mask disjointness/range and shape agreement between graph, features and labels.
    void validate(bool multiclass) const;
};

// Edge list: "src<TAB>dst" per line, optionally "<TAB>relation". Blank lines are skipped.
Graph load_edge_list(std::istream& in, std::size_t n);
HeteroGraph load_edge_list_hetero(std::istream& in, std::size_t n);
// Largest id + 1 found in an edge list (0 when empty); does not validate.
std::size_t scan_node_count(std::istream& in);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list(std::ostream& out, const HeteroGraph& g);

// A_hat = D^{-1/2} (A + I) D^{-1/2}, D the column sums of A + I.
Graph renormalize(const Graph& g);
SparseAdjacency renormalize(const SparseAdjacency& a);
HeteroGraph renormalize(const HeteroGraph& g);

// Features: one node per line, p numbers. Returned as p x n.
DenseMatrix load_features(std::istream& in, std::optional<std::size_t> expected_nodes = std::nullopt);
// Labels: one node per line, c flags in {0,1}. Returned as c x n.
DenseMatrix load_labels(std::istream& in, std::optional<std::size_t> expected_nodes = std::nullopt);
// Sections "train:", "val:", "test:" each followed by whitespace-separated ids.
Splits load_splits(std::istream& in, std::size_t n);

void write_features(std::ostream& out, const DenseMatrix& features);
void write_labels(std::ostream& out, const DenseMatrix& labels);
void write_splits(std::ostream& out, const Splits& splits);

struct ChainsOptions {
    std::size_t length = 9;  // edges per chain; l + 1 nodes
    std::size_t chains_per_class = 20;
    std::size_t feature_dim = 100;
    std::size_t train = 20;
    std::size_t val = 100;
    std::size_t test = 200;
    std::uint64_t seed = 0;
};

// Two classes of directed chains. Node c*(l+1) + k is the k-th node of chain c;
// the first chains_per_class chains are class 0. Only class-1 start nodes carry a
// nonzero feature (a 1 in dimension 0). The returned adjacency is raw (not renormalized).
NodeDataset gen_chains(const ChainsOptions& opts);

}  // namespace ignn
