#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ignn/config.hpp"
#include "ignn/graph.hpp"
#include "ignn/model.hpp"

namespace ignn {

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_f1 = 0.0;
    double val_f1 = 0.0;
    std::size_t fwd_iters = 0;
    std::size_t bwd_iters = 0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 1-based; the returned model is the one after this epoch
    double best_val_f1 = -1.0;
};

struct TrainResult {
    IgnnModel model;  // best-validation parameters
    TrainHistory history;
};

// One graph of a graph-classification set.
struct GraphSample {
    SparseAdjacency adjacency;
    DenseMatrix features;  // p x n_g
    std::size_t label = 0;
};

struct GraphDataset {
    std::vector<GraphSample> graphs;
    std::size_t num_classes = 0;
    Splits splits;  // indices into graphs
};

NodeDataset load_node_dataset(const TrainConfig& cfg);
// graph_list lines: "edges_path <tab> features_path <tab> label", paths relative to the list file.
GraphDataset load_graph_dataset(const TrainConfig& cfg);

// Learned features take p = hidden.front() dimensions.
ModelSpec model_spec(const TrainConfig& cfg, std::size_t input_dim, std::size_t output_dim, std::size_t relations,
                     std::optional<std::size_t> learnable_nodes);

// Projected gradient training. Metrics rows go to `log` (may be null) every cfg.log_every epochs.
TrainResult train(const TrainConfig& cfg, const NodeDataset& data, std::ostream* log = nullptr);
TrainResult train(const TrainConfig& cfg, const GraphDataset& data, std::ostream* log = nullptr);

std::string metrics_header();
std::string format_record(const EpochRecord& r);

struct SplitMetrics {
    std::size_t count = 0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::optional<double> accuracy;  // multiclass only
};

struct EvalReport {
    std::optional<SplitMetrics> train;
    std::optional<SplitMetrics> val;
    SplitMetrics test;
};

// Eval-mode forward; the test mask must be nonempty.
EvalReport evaluate(const IgnnModel& model, const NodeDataset& data, Task task);
EvalReport evaluate(const IgnnModel& model, const GraphDataset& data);
std::string format_report(const EvalReport& r);

// One line per node: id, split name, then the binarized prediction flags.
void write_predictions(std::ostream& out, const IgnnModel& model, const NodeDataset& data, Task task);

}  // namespace ignn
