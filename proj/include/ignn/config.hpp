#pragma once

// Training configuration read from "key = value" text; '#' starts a comment.
// Lists are comma-separated. Relative paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ignn/activation.hpp"
#include "ignn/model.hpp"

namespace ignn {

enum class Task { node_multiclass, node_multilabel, graph };
enum class OptimizerKind { sgd, adam };

std::string to_string(Task t);
std::string to_string(OptimizerKind k);

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct TrainConfig {
    Task task = Task::node_multiclass;

    // optimizer
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double momentum = 0.0;  // sgd
    std::size_t epochs = 200;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;

    // model
    std::vector<std::size_t> hidden{16};
    std::vector<double> kappa{0.95};
    std::vector<double> relation_kappas;
    Activation activation = Activation::relu();
    BForm b_form = BForm::omega_ua;
    HeadKind head = HeadKind::linear;
    std::size_t head_hidden = 16;
    Activation head_activation = Activation::relu();
    Readout readout = Readout::graph_sum;  // graph task only
    bool inter_layer_maps = false;
    Activation inter_activation = Activation::relu();
    double dropout = 0.5;
    bool learn_features = false;  // ignore the features file and learn U

    // solver
    double tol = 1e-6;
    std::size_t max_iter = 300;
    std::optional<double> backward_tol;          // defaults to tol
    std::optional<std::size_t> backward_max_iter;  // defaults to max_iter
    bool warm_start = true;

    // data
    std::filesystem::path edges;
    std::optional<std::size_t> nodes;  // otherwise taken from labels
    bool relation_column = false;
    std::filesystem::path features;
    std::filesystem::path labels;
    std::filesystem::path splits;
    std::filesystem::path graph_list;  // graph task: "edges <tab> features <tab> label" per line
    bool renormalize = true;

    // output
    std::filesystem::path checkpoint;
    std::filesystem::path metrics;
    std::size_t log_every = 1;  // metrics cadence in epochs
    bool quiet = false;         // no metrics on stdout

    SolveOptions forward_options() const { return {tol, max_iter}; }
    SolveOptions backward_options() const { return {backward_tol.value_or(tol), backward_max_iter.value_or(max_iter)}; }

    // Throws ConfigError on out-of-range values. Data paths are checked when a dataset is loaded.
    void validate() const;
};

// Applies one key/value pair; unknown keys and malformed values throw ConfigError.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir = {});

TrainConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
TrainConfig load_config(const std::filesystem::path& path);

// All keys with their current values, in the order accepted by parse_config.
std::string format_config(const TrainConfig& cfg);

}  // namespace ignn
