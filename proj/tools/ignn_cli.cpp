// ignn: generate the chains dataset, train, evaluate, check and rescale models.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ignn/checkpoint.hpp"
#include "ignn/config.hpp"
#include "ignn/graph.hpp"
#include "ignn/train.hpp"
#include "ignn/wellposed.hpp"

namespace fs = std::filesystem;
using namespace ignn;

namespace {

// Exit codes: 1 usage/config, 2 input data, 3 solver non-convergence, 4 other runtime failure.
int fail(int code, const std::string& kind, const std::string& what) {
    std::cerr << "error[" << kind << "]: " << what << '\n';
    return code;
}

template <class Stream>
Stream open_or_throw(const fs::path& path) {
    Stream s(path);
    if (!s) throw std::runtime_error("cannot open " + path.string());
    return s;
}

int cmd_gen_chains(const ChainsOptions& opts, const fs::path& out_dir) {
    const NodeDataset data = gen_chains(opts);
    fs::create_directories(out_dir);
    {
        auto out = open_or_throw<std::ofstream>(out_dir / "edges.tsv");
        write_edge_list(out, std::get<Graph>(data.graph));
    }
    {
        auto out = open_or_throw<std::ofstream>(out_dir / "features.txt");
        write_features(out, *data.features);
    }
    {
        auto out = open_or_throw<std::ofstream>(out_dir / "labels.txt");
        write_labels(out, data.labels);
    }
    {
        auto out = open_or_throw<std::ofstream>(out_dir / "splits.txt");
        write_splits(out, data.splits);
    }
    std::cout << "wrote " << data.num_nodes() << " nodes, "
              << std::get<Graph>(data.graph).adjacency.nnz() << " edges to " << out_dir.string() << '\n';
    return 0;
}

int cmd_train(const fs::path& config_path, const std::vector<std::string>& overrides) {
    TrainConfig cfg = load_config(config_path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
    }
    cfg.validate();
    TrainResult result;
    EvalReport report;
    if (cfg.task == Task::graph) {
        const GraphDataset data = load_graph_dataset(cfg);
        result = train(cfg, data, &std::cout);
        report = evaluate(result.model, data);
    } else {
        const NodeDataset data = load_node_dataset(cfg);
        result = train(cfg, data, &std::cout);
        report = evaluate(result.model, data, cfg.task);
    }
    std::cout << "best_epoch\t" << result.history.best_epoch << "\nbest_val_f1\t" << result.history.best_val_f1 << '\n';
    std::cout << format_report(report);
    if (!cfg.checkpoint.empty()) {
        save_checkpoint(result.model, cfg.checkpoint);
        std::cout << "checkpoint\t" << cfg.checkpoint.string() << '\n';
    }
    return 0;
}

int cmd_eval(const fs::path& ckpt, const fs::path& config_path, const fs::path& predictions) {
    const IgnnModel model = load_checkpoint(ckpt);
    const TrainConfig cfg = load_config(config_path);
    if (cfg.task == Task::graph) {
        const GraphDataset data = load_graph_dataset(cfg);
        std::cout << format_report(evaluate(model, data));
        if (!predictions.empty()) throw ConfigError("--predictions is only supported for node tasks");
        return 0;
    }
    const NodeDataset data = load_node_dataset(cfg);
    std::cout << format_report(evaluate(model, data, cfg.task));
    if (!predictions.empty()) {
        auto out = open_or_throw<std::ofstream>(predictions);
        write_predictions(out, model, data, cfg.task);
    }
    return 0;
}

int cmd_check(const fs::path& ckpt, const fs::path& graph_path, std::optional<std::size_t> nodes, bool renorm,
              bool relation_column) {
    const IgnnModel model = load_checkpoint(ckpt);
    std::size_t n = 0;
    if (nodes) {
        n = *nodes;
    } else {
        auto in = open_or_throw<std::ifstream>(graph_path);
        n = scan_node_count(in);
    }
    auto in = open_or_throw<std::ifstream>(graph_path);
    std::vector<SparseAdjacency> adjacencies;
    if (relation_column) {
        HeteroGraph g = load_edge_list_hetero(in, n);
        if (renorm) g = renormalize(g);
        for (auto& r : g.relations) adjacencies.push_back(std::move(r.adjacency));
    } else {
        Graph g = load_edge_list(in, n);
        adjacencies.push_back(renorm ? renormalize(g.adjacency) : std::move(g.adjacency));
    }
    std::vector<const SparseAdjacency*> As;
    for (const auto& a : adjacencies) As.push_back(&a);
    if (As.size() != model.relation_count()) {
        throw DimensionError("model has " + std::to_string(model.relation_count()) + " relations, graph has " +
                             std::to_string(As.size()));
    }
    bool all = true;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        const auto Ws = weights_of(layer.relations);
        double kappa = 0.0;
        for (double k : layer.kappa) kappa += k;
        const WellPosedReport r = As.size() == 1 ? check(Ws.front(), *As.front()) : check_hetero(Ws, As, kappa);
        std::cout << "layer " << l << '\n' << format_report(r);
        all = all && (r.pf_holds || r.tractable_holds);
    }
    std::cout << (all ? "well-posed\n" : "not certified\n");
    return all ? 0 : 5;
}

int cmd_rescale(const fs::path& ckpt, const fs::path& out, std::optional<std::size_t> layer) {
    IgnnModel model = load_checkpoint(ckpt);
    std::vector<std::size_t> targets;
    if (layer) {
        targets.push_back(*layer);
    } else {
        for (std::size_t l = 0; l < model.layers.size(); ++l) targets.push_back(l);
    }
    for (std::size_t l : targets) {
        const double before = inf_norm(model.layers.at(l).relations.front().W);
        Rescaling info;
        model = rescale_model(model, l, &info);
        std::printf("layer %zu\tinf_norm_before %.10g\tinf_norm_after %.10g\tlambda_pf_absW %.10g%s\n", l, before,
                    inf_norm(model.layers[l].relations.front().W), info.lambda_pf_absW,
                    info.regularized ? "\tregularized" : "");
    }
    save_checkpoint(model, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit graph neural networks"};
    app.require_subcommand(1);

    ChainsOptions chains;
    fs::path chains_out;
    auto* gen = app.add_subcommand("gen-chains", "Write the synthetic chains dataset");
    gen->add_option("--length", chains.length, "Edges per chain")->capture_default_str();
    gen->add_option("--per-class", chains.chains_per_class, "Chains per class")->capture_default_str();
    gen->add_option("--dim", chains.feature_dim, "Feature dimension")->capture_default_str();
    gen->add_option("--train", chains.train, "Training nodes")->capture_default_str();
    gen->add_option("--val", chains.val, "Validation nodes")->capture_default_str();
    gen->add_option("--test", chains.test, "Test nodes")->capture_default_str();
    gen->add_option("--seed", chains.seed, "Split seed")->capture_default_str();
    gen->add_option("--out", chains_out, "Output directory")->required();

    fs::path train_config;
    std::vector<std::string> overrides;
    auto* tr = app.add_subcommand("train", "Train a model from a config file");
    tr->add_option("--config", train_config, "Config file")->required()->check(CLI::ExistingFile);
    tr->add_option("--set", overrides, "Override a config entry (key=value), repeatable");

    fs::path eval_ckpt, eval_config, eval_pred;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the dataset named in a config");
    ev->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
    ev->add_option("--config", eval_config, "Config naming the dataset and task")->required()->check(CLI::ExistingFile);
    ev->add_option("--predictions", eval_pred, "Write per-node predictions here");

    fs::path check_ckpt, check_graph;
    std::optional<std::size_t> check_nodes;
    bool check_renorm = false, check_rel = false;
    auto* ck = app.add_subcommand("check", "Report well-posedness of a checkpoint's weights on a graph");
    ck->add_option("--weights", check_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
    ck->add_option("--graph", check_graph, "Edge list")->required()->check(CLI::ExistingFile);
    ck->add_option("--nodes", check_nodes, "Node count (default: largest id + 1)");
    ck->add_flag("--renormalize", check_renorm, "Renormalize the adjacency first");
    ck->add_flag("--relation-column", check_rel, "Edge list carries a relation column");

    fs::path rs_ckpt, rs_out;
    std::optional<std::size_t> rs_layer;
    auto* rs = app.add_subcommand("rescale", "Rescale layer weights to minimal infinity norm");
    rs->add_option("--checkpoint", rs_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
    rs->add_option("--out", rs_out, "Output checkpoint")->required();
    rs->add_option("--layer", rs_layer, "Only this layer (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) return cmd_gen_chains(chains, chains_out);
        if (*tr) return cmd_train(train_config, overrides);
        if (*ev) return cmd_eval(eval_ckpt, eval_config, eval_pred);
        if (*ck) return cmd_check(check_ckpt, check_graph, check_nodes, check_renorm, check_rel);
        if (*rs) return cmd_rescale(rs_ckpt, rs_out, rs_layer);
    } catch (const ConfigError& e) {
        return fail(1, "config", e.what());
    } catch (const ParseError& e) {
        return fail(2, "parse", e.what());
    } catch (const CheckpointError& e) {
        return fail(2, "checkpoint", e.what());
    } catch (const DimensionError& e) {
        return fail(2, "shape", e.what());
    } catch (const NonConvergence& e) {
        return fail(3, "nonconvergence", e.what());
    } catch (const std::exception& e) {
        return fail(4, "runtime", e.what());
    }
    return 0;
}
