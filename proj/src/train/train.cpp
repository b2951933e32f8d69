#include "ignn/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ignn/loss.hpp"
#include "ignn/optim.hpp"

namespace ignn {
namespace {

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(std::string("cannot open ") + what + " file " + path.string());
    return in;
}

template <class F>
auto with_file_context(const std::filesystem::path& path, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw e.in_file(path.string());
    }
}

LossResult task_loss(Task task, const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    return task == Task::node_multilabel ? bce_multilabel(logits, labels, mask) : softmax_xent_masked(logits, labels, mask);
}

DenseMatrix binarize(Task task, const DenseMatrix& logits) {
    return task == Task::node_multilabel ? binarize_threshold(logits) : binarize_argmax(logits);
}

void add_weight_decay(IgnnModel& grad, const IgnnModel& model, double wd) {
    if (wd == 0.0) return;
    auto g = named_tensors(grad);
    auto p = named_tensors(model);
    for (std::size_t k = 0; k < g.size(); ++k) axpy(wd, *p[k].second, *g[k].second);
}

void optimizer_step(const TrainConfig& cfg, IgnnModel& model, const IgnnModel& grad, OptimizerState& state) {
    std::vector<DenseMatrix*> params;
    std::vector<const DenseMatrix*> grads;
    for (auto& [name, t] : named_tensors(model)) params.push_back(t);
    for (const auto& [name, t] : named_tensors(grad)) grads.push_back(t);
    if (cfg.optimizer == OptimizerKind::adam) {
        adam_step(params, grads, state, {cfg.lr, cfg.beta1, cfg.beta2, cfg.eps});
    } else {
        sgd_step(params, grads, state, {cfg.lr, cfg.momentum});
    }
}

void project_and_verify(IgnnModel& model, const std::vector<ConstraintSpec>& specs, std::size_t epoch) {
    project_model(model, specs);
    const double violation = constraint_violation(model, specs);
    if (violation > 1e-12) {
        throw std::logic_error("epoch " + std::to_string(epoch) + ": projected weights violate the constraint by " +
                               std::to_string(violation));
    }
}

void emit(std::ostream* log, std::ofstream* file, const std::string& line) {
    if (log) *log << line << '\n' << std::flush;
    if (file && *file) *file << line << '\n' << std::flush;
}

bool better(const EpochRecord& r, const TrainHistory& h) {
    if (h.best_epoch == 0) return true;
    if (r.val_f1 != h.best_val_f1) return r.val_f1 > h.best_val_f1;
    return r.loss < h.epochs[h.best_epoch - 1].loss;
}

std::optional<std::ofstream> open_metrics(const TrainConfig& cfg) {
    if (cfg.metrics.empty()) return std::nullopt;
    std::ofstream out(cfg.metrics);
    if (!out) throw std::runtime_error("cannot open metrics file " + cfg.metrics.string());
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SplitMetrics split_metrics(const DenseMatrix& logits, const DenseMatrix& pred, const DenseMatrix& labels,
                           const std::vector<std::size_t>& mask, bool multiclass) {
    SplitMetrics m;
    m.count = mask.size();
    m.micro_f1 = micro_f1(pred, labels, mask);
    m.macro_f1 = macro_f1(pred, labels, mask);
    if (multiclass) m.accuracy = accuracy(logits, labels, mask);
    return m;
}

EvalReport report_from(const DenseMatrix& logits, const DenseMatrix& labels, const Splits& splits, Task task) {
    if (splits.test.empty()) throw std::invalid_argument("evaluate: empty test mask");
    const DenseMatrix pred = binarize(task, logits);
    const bool multiclass = task != Task::node_multilabel;
    EvalReport r;
    r.test = split_metrics(logits, pred, labels, splits.test, multiclass);
    if (!splits.train.empty()) r.train = split_metrics(logits, pred, labels, splits.train, multiclass);
    if (!splits.val.empty()) r.val = split_metrics(logits, pred, labels, splits.val, multiclass);
    return r;
}

struct GraphEval {
    DenseMatrix logits;  // c x G
    DenseMatrix labels;  // c x G
};

GraphEval graph_logits(const IgnnModel& model, const GraphDataset& data) {
    const std::size_t c = model.head.output_dim();
    GraphEval out{DenseMatrix(c, data.graphs.size()), DenseMatrix(c, data.graphs.size())};
    for (std::size_t g = 0; g < data.graphs.size(); ++g) {
        const auto& s = data.graphs[g];
        const ForwardCache cache = forward(model, {&s.adjacency}, &s.features);
        for (std::size_t k = 0; k < c; ++k) out.logits(k, g) = cache.predictions(k, 0);
        out.labels(s.label, g) = 1.0;
    }
    return out;
}

}  // namespace

NodeDataset load_node_dataset(const TrainConfig& cfg) {
    if (cfg.labels.empty() || cfg.edges.empty() || cfg.splits.empty())
        throw ConfigError("node tasks need edges, labels and splits");
    NodeDataset data;
    {
        auto in = open_input(cfg.labels, "labels");
        data.labels = with_file_context(cfg.labels, [&] { return load_labels(in, cfg.nodes); });
    }
    const std::size_t n = data.labels.cols();
    {
        auto in = open_input(cfg.edges, "edges");
        if (cfg.relation_column) {
            HeteroGraph g = with_file_context(cfg.edges, [&] { return load_edge_list_hetero(in, n); });
            data.graph = cfg.renormalize ? renormalize(g) : std::move(g);
        } else {
            Graph g = with_file_context(cfg.edges, [&] { return load_edge_list(in, n); });
            data.graph = cfg.renormalize ? renormalize(g) : std::move(g);
        }
    }
    if (!cfg.features.empty() && !cfg.learn_features) {
        auto in = open_input(cfg.features, "features");
        data.features = with_file_context(cfg.features, [&] { return load_features(in, n); });
    }
    {
        auto in = open_input(cfg.splits, "splits");
        data.splits = with_file_context(cfg.splits, [&] { return load_splits(in, n); });
    }
    data.validate(cfg.task == Task::node_multiclass);
    return data;
}

GraphDataset load_graph_dataset(const TrainConfig& cfg) {
    if (cfg.graph_list.empty() || cfg.splits.empty()) throw ConfigError("graph task needs graph_list and splits");
    GraphDataset data;
    auto list = open_input(cfg.graph_list, "graph list");
    const auto base = cfg.graph_list.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(list, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() != 3) throw ParseError("expected 3 tab-separated columns", lineno, cfg.graph_list.string());
        std::size_t label = 0;
        try {
            std::size_t used = 0;
            label = std::stoul(cols[2], &used);
            if (used != cols[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("bad label '" + cols[2] + "'", lineno, cfg.graph_list.string());
        }
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_relative() ? base / path : path;
        };
        const auto fpath = resolve(cols[1]);
        const auto epath = resolve(cols[0]);
        auto fin = open_input(fpath, "features");
        GraphSample s;
        s.features = with_file_context(fpath, [&] { return load_features(fin); });
        auto ein = open_input(epath, "edges");
        Graph g = with_file_context(epath, [&] { return load_edge_list(ein, s.features.cols()); });
        s.adjacency = cfg.renormalize ? renormalize(g.adjacency) : std::move(g.adjacency);
        s.label = label;
        if (!data.graphs.empty() && s.features.rows() != data.graphs.front().features.rows())
            throw ParseError("feature dimension differs from the first graph", lineno, cfg.graph_list.string());
        data.num_classes = std::max(data.num_classes, label + 1);
        data.graphs.push_back(std::move(s));
    }
    if (data.graphs.empty()) throw ParseError("no graphs", lineno, cfg.graph_list.string());
    auto in = open_input(cfg.splits, "splits");
    data.splits = with_file_context(cfg.splits, [&] { return load_splits(in, data.graphs.size()); });
    return data;
}

ModelSpec model_spec(const TrainConfig& cfg, std::size_t input_dim, std::size_t output_dim, std::size_t relations,
                     std::optional<std::size_t> learnable_nodes) {
    ModelSpec s;
    s.input_dim = learnable_nodes ? cfg.hidden.front() : input_dim;
    s.hidden = cfg.hidden;
    s.output_dim = output_dim;
    s.relations = relations;
    s.b_form = cfg.b_form;
    s.activation = cfg.activation;
    s.kappa = cfg.kappa;
    s.relation_kappas = cfg.relation_kappas;
    s.inter_layer_maps = cfg.inter_layer_maps;
    s.inter_activation = cfg.inter_activation;
    s.head = cfg.head;
    s.head_hidden = cfg.head_hidden;
    s.head_activation = cfg.head_activation;
    s.readout = cfg.task == Task::graph ? cfg.readout : Readout::node;
    s.learnable_nodes = learnable_nodes;
    s.dropout = cfg.dropout;
    s.forward_solve = cfg.forward_options();
    s.backward_solve = cfg.backward_options();
    return s;
}

std::string metrics_header() { return "epoch\tloss\ttrain_f1\tval_f1\tfwd_iters\tbwd_iters\tseconds"; }

std::string format_record(const EpochRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.4f\t%.4f\t%zu\t%zu\t%.3f", r.epoch, r.loss, r.train_f1, r.val_f1,
                  r.fwd_iters, r.bwd_iters, r.seconds);
    return buf;
}

TrainResult train(const TrainConfig& cfg, const NodeDataset& data, std::ostream* log) {
    cfg.validate();
    if (cfg.task == Task::graph) throw ConfigError("graph task needs a graph dataset");
    data.validate(cfg.task == Task::node_multiclass);
    if (data.splits.train.empty()) throw std::invalid_argument("train: empty training mask");

    const auto As = data.adjacencies();
    const DenseMatrix* U = data.features ? &*data.features : nullptr;
    const std::optional<std::size_t> learn = U ? std::nullopt : std::optional<std::size_t>(data.num_nodes());
    IgnnModel model = init_model(model_spec(cfg, U ? U->rows() : 0, data.num_classes(), As.size(), learn), cfg.seed);
    const auto specs = constraint_specs(model, As);
    project_and_verify(model, specs, 0);

    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    OptimizerState opt;
    std::optional<ForwardCache> warm;
    auto metrics_file = open_metrics(cfg);
    emit(cfg.quiet ? nullptr : log, metrics_file ? &*metrics_file : nullptr, metrics_header());

    TrainResult result{model, {}};
    const auto& val_mask = data.splits.val.empty() ? data.splits.train : data.splits.val;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        try {
            ForwardOptions fo{Mode::train, &dropout_rng, cfg.warm_start && warm ? &*warm : nullptr};
            ForwardCache cache = forward(model, As, U, fo);
            const LossResult loss = task_loss(cfg.task, cache.predictions, data.labels, data.splits.train);
            ModelGradients grads = backward(model, As, U, cache, loss.grad);
            add_weight_decay(grads.grad, model, cfg.weight_decay);
            optimizer_step(cfg, model, grads.grad, opt);
            project_and_verify(model, specs, epoch);

            const ForwardCache eval = forward(model, As, U);
            const DenseMatrix pred = binarize(cfg.task, eval.predictions);
            rec.loss = loss.loss;
            rec.train_f1 = micro_f1(pred, data.labels, data.splits.train);
            rec.val_f1 = micro_f1(pred, data.labels, val_mask);
            rec.fwd_iters = cache.forward_iterations;
            rec.bwd_iters = grads.backward_iterations;
            if (cfg.warm_start) warm = std::move(cache);
        } catch (const NonConvergence& e) {
            throw e.with_context("epoch " + std::to_string(epoch));
        }
        rec.seconds = seconds_since(t0);
        if (better(rec, result.history)) {
            result.model = model;
            result.history.best_epoch = epoch;
            result.history.best_val_f1 = rec.val_f1;
        }
        result.history.epochs.push_back(rec);
        if (epoch % cfg.log_every == 0 || epoch == cfg.epochs)
            emit(cfg.quiet ? nullptr : log, metrics_file ? &*metrics_file : nullptr, format_record(rec));
    }
    return result;
}

TrainResult train(const TrainConfig& cfg, const GraphDataset& data, std::ostream* log) {
    cfg.validate();
    if (cfg.task != Task::graph) throw ConfigError("node tasks need a node dataset");
    if (data.graphs.empty() || data.splits.train.empty()) throw std::invalid_argument("train: no training graphs");
    if (data.num_classes < 2) throw std::invalid_argument("train: graph labels need at least two classes");

    IgnnModel model =
        init_model(model_spec(cfg, data.graphs.front().features.rows(), data.num_classes, 1, std::nullopt), cfg.seed);
    // One constraint for all graphs: the radius set by the largest lambda_pf(A_g).
    const SparseAdjacency* widest = &data.graphs.front().adjacency;
    for (const auto& g : data.graphs)
        if (g.adjacency.pf_eigenvalue() > widest->pf_eigenvalue()) widest = &g.adjacency;
    const auto specs = constraint_specs(model, {widest});
    project_and_verify(model, specs, 0);

    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    OptimizerState opt;
    std::vector<std::optional<ForwardCache>> warm(data.graphs.size());
    auto metrics_file = open_metrics(cfg);
    emit(cfg.quiet ? nullptr : log, metrics_file ? &*metrics_file : nullptr, metrics_header());

    const std::size_t c = data.num_classes;
    const std::vector<std::size_t> single{0};
    const double inv = 1.0 / static_cast<double>(data.splits.train.size());
    TrainResult result{model, {}};
    const auto& val_mask = data.splits.val.empty() ? data.splits.train : data.splits.val;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        try {
            IgnnModel total = zeros_like(model);
            auto total_t = named_tensors(total);
            for (std::size_t g : data.splits.train) {
                const auto& s = data.graphs[g];
                ForwardOptions fo{Mode::train, &dropout_rng, cfg.warm_start && warm[g] ? &*warm[g] : nullptr};
                ForwardCache cache = forward(model, {&s.adjacency}, &s.features, fo);
                DenseMatrix y(c, 1);
                y(s.label, 0) = 1.0;
                const LossResult loss = softmax_xent_masked(cache.predictions, y, single);
                ModelGradients grads = backward(model, {&s.adjacency}, &s.features, cache, loss.grad);
                auto gt = named_tensors(grads.grad);
                for (std::size_t k = 0; k < gt.size(); ++k) axpy(inv, *gt[k].second, *total_t[k].second);
                rec.loss += inv * loss.loss;
                rec.fwd_iters += cache.forward_iterations;
                rec.bwd_iters += grads.backward_iterations;
                if (cfg.warm_start) warm[g] = std::move(cache);
            }
            add_weight_decay(total, model, cfg.weight_decay);
            optimizer_step(cfg, model, total, opt);
            project_and_verify(model, specs, epoch);
            const GraphEval ev = graph_logits(model, data);
            const DenseMatrix pred = binarize_argmax(ev.logits);
            rec.train_f1 = micro_f1(pred, ev.labels, data.splits.train);
            rec.val_f1 = micro_f1(pred, ev.labels, val_mask);
        } catch (const NonConvergence& e) {
            throw e.with_context("epoch " + std::to_string(epoch));
        }
        rec.seconds = seconds_since(t0);
        if (better(rec, result.history)) {
            result.model = model;
            result.history.best_epoch = epoch;
            result.history.best_val_f1 = rec.val_f1;
        }
        result.history.epochs.push_back(rec);
        if (epoch % cfg.log_every == 0 || epoch == cfg.epochs)
            emit(cfg.quiet ? nullptr : log, metrics_file ? &*metrics_file : nullptr, format_record(rec));
    }
    return result;
}

EvalReport evaluate(const IgnnModel& model, const NodeDataset& data, Task task) {
    if (task == Task::graph) throw std::invalid_argument("evaluate: graph task needs a graph dataset");
    if (model.head.output_dim() != data.num_classes())
        throw DimensionError("evaluate: model predicts " + std::to_string(model.head.output_dim()) +
                             " classes, labels have " + std::to_string(data.num_classes()));
    const ForwardCache cache = forward(model, data);
    return report_from(cache.predictions, data.labels, data.splits, task);
}

EvalReport evaluate(const IgnnModel& model, const GraphDataset& data) {
    if (model.head.output_dim() < data.num_classes) throw DimensionError("evaluate: model predicts too few classes");
    const GraphEval ev = graph_logits(model, data);
    return report_from(ev.logits, ev.labels, data.splits, Task::graph);
}

std::string format_report(const EvalReport& r) {
    std::ostringstream out;
    out << "split\tcount\tmicro_f1\tmacro_f1\taccuracy\n";
    auto row = [&](const char* name, const SplitMetrics& m) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s\t%zu\t%.6f\t%.6f\t", name, m.count, m.micro_f1, m.macro_f1);
        out << buf;
        if (m.accuracy) {
            std::snprintf(buf, sizeof buf, "%.6f", *m.accuracy);
            out << buf;
        } else {
            out << '-';
        }
        out << '\n';
    };
    if (r.train) row("train", *r.train);
    if (r.val) row("val", *r.val);
    row("test", r.test);
    return out.str();
}

void write_predictions(std::ostream& out, const IgnnModel& model, const NodeDataset& data, Task task) {
    const ForwardCache cache = forward(model, data);
    const DenseMatrix pred = binarize(task, cache.predictions);
    std::vector<const char*> split(data.num_nodes(), "none");
    for (std::size_t j : data.splits.train) split[j] = "train";
    for (std::size_t j : data.splits.val) split[j] = "val";
    for (std::size_t j : data.splits.test) split[j] = "test";
    for (std::size_t j = 0; j < pred.cols(); ++j) {
        out << j << '\t' << split[j];
        for (std::size_t k = 0; k < pred.rows(); ++k) out << '\t' << (pred(k, j) != 0.0 ? 1 : 0);
        out << '\n';
    }
}

}  // namespace ignn
