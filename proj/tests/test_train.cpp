#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>

#include "ignn/config.hpp"
#include "ignn/loss.hpp"
#include "ignn/optim.hpp"
#include "ignn/train.hpp"
#include "support/reference.hpp"

using namespace ignn;

namespace {

NodeDataset chains(std::size_t length) {
    ChainsOptions o;
    o.length = length;
    o.val = 40;
    o.test = 60;
    NodeDataset ds = gen_chains(o);
    ds.graph = renormalize(std::get<Graph>(ds.graph));
    return ds;
}

TrainConfig quick_config(std::size_t epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.dropout = 0.0;
    c.quiet = true;
    return c;
}

bool same_history(const TrainHistory& a, const TrainHistory& b) {
    if (a.epochs.size() != b.epochs.size() || a.best_epoch != b.best_epoch) return false;
    for (std::size_t k = 0; k < a.epochs.size(); ++k) {
        const auto& x = a.epochs[k];
        const auto& y = b.epochs[k];
        if (x.loss != y.loss || x.train_f1 != y.train_f1 || x.val_f1 != y.val_f1 || x.fwd_iters != y.fwd_iters ||
            x.bwd_iters != y.bwd_iters)
            return false;
    }
    return true;
}

}  // namespace

TEST(Optim, SgdMomentumExample) {
    DenseMatrix p(1, 1, 1.0);
    const DenseMatrix g(1, 1, 1.0);
    OptimizerState st;
    sgd_step({&p}, {&g}, st, {0.1, 0.9});
    EXPECT_DOUBLE_EQ(p(0, 0), 0.9);
    sgd_step({&p}, {&g}, st, {0.1, 0.9});
    EXPECT_NEAR(p(0, 0), 0.71, 1e-15);
    EXPECT_EQ(st.step, 2u);
}

TEST(Optim, AdamFirstStepMovesByLearningRate) {
    DenseMatrix p = DenseMatrix::from_rows({{1.0, -2.0}});
    const DenseMatrix g = DenseMatrix::from_rows({{0.5, -3.0}});
    OptimizerState st;
    adam_step({&p}, {&g}, st, {});
    EXPECT_NEAR(p(0, 0), 0.99, 1e-9);
    EXPECT_NEAR(p(0, 1), -1.99, 1e-9);
    // Second step, hand computed.
    const DenseMatrix g2 = DenseMatrix::from_rows({{0.5, 1.0}});
    const double p1 = p(0, 1);
    adam_step({&p}, {&g2}, st, {});
    const double m = (0.9 * 0.1 * -3.0 + 0.1 * 1.0) / (1 - 0.81);
    const double v = (0.999 * 0.001 * 9.0 + 0.001 * 1.0) / (1 - 0.999 * 0.999);
    EXPECT_NEAR(p(0, 1), p1 - 0.01 * m / (std::sqrt(v) + 1e-8), 1e-12);
    const DenseMatrix wrong(2, 2);
    EXPECT_THROW(adam_step({&p}, {&wrong}, st, {}), DimensionError);
}

TEST(Config, ParsesCommentsAndResolvesPaths) {
    std::istringstream in(
        "# chains run\n"
        "epochs = 30   # short\n"
        "hidden = 8, 4\n"
        "kappa = 0.9\n"
        "activation = leaky_relu:0.2\n"
        "b_form = both\n"
        "edges = data/edges.tsv\n"
        "labels = /abs/labels.txt\n"
        "splits = s.txt\n"
        "warm_start = false\n"
        "backward_tol = 1e-8\n");
    const TrainConfig c = parse_config(in, "/base");
    EXPECT_EQ(c.epochs, 30u);
    EXPECT_EQ(c.hidden, (std::vector<std::size_t>{8, 4}));
    EXPECT_EQ(c.activation, Activation::leaky_relu(0.2));
    EXPECT_EQ(c.b_form, BForm::both);
    EXPECT_EQ(c.edges, std::filesystem::path("/base/data/edges.tsv"));
    EXPECT_EQ(c.labels, std::filesystem::path("/abs/labels.txt"));
    EXPECT_FALSE(c.warm_start);
    EXPECT_EQ(c.backward_options().tol, 1e-8);
    EXPECT_EQ(c.backward_options().max_iter, 300u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ErrorsReportLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            parse_config(in);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("lr = 0.1\nlearning_rate = 0.1\n"), 2u);
    EXPECT_EQ(line_of("\n\nepochs = ten\n"), 3u);
    EXPECT_EQ(line_of("lr = 0.1\nlr = 0.2\n"), 2u);
    EXPECT_EQ(line_of("just words\n"), 1u);
    EXPECT_EQ(line_of("activation = softplus\n"), 1u);
    EXPECT_EQ(line_of("hidden = 4,,2\n"), 1u);
    EXPECT_EQ(line_of("warm_start = maybe\n"), 1u);
}

TEST(Config, ValidateRejectsOutOfRange) {
    TrainConfig c;
    c.edges = "e";
    c.labels = "l";
    c.splits = "s";
    EXPECT_NO_THROW(c.validate());
    for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
             [](TrainConfig& x) { x.kappa = {1.0}; },
             [](TrainConfig& x) { x.kappa = {0.5, 0.5, 0.5}; },
             [](TrainConfig& x) { x.dropout = 1.0; },
             [](TrainConfig& x) { x.lr = 0.0; },
             [](TrainConfig& x) { x.hidden = {}; },
             [](TrainConfig& x) { x.log_every = 0; },
             [](TrainConfig& x) { x.backward_tol = -1.0; }}) {
        TrainConfig bad = c;
        mutate(bad);
        EXPECT_THROW(bad.validate(), ConfigError);
    }
}

TEST(Config, FormatRoundTripsEveryKey) {
    TrainConfig c;
    c.task = Task::node_multilabel;
    c.optimizer = OptimizerKind::sgd;
    c.momentum = 0.9;
    c.hidden = {7, 3};
    c.kappa = {0.5, 0.25};
    c.relation_kappas = {0.3, 0.2};
    c.activation = Activation::tanh();
    c.head = HeadKind::mlp;
    c.readout = Readout::graph_mean;
    c.inter_layer_maps = true;
    c.backward_tol = 1e-9;
    c.backward_max_iter = 77;
    c.nodes = 12;
    c.edges = "/x/e.tsv";
    c.metrics = "/x/m.tsv";
    c.seed = 123456789012345ULL;
    c.lr = 0.1 + 0.2;
    const std::string text = format_config(c);
    std::istringstream in(text);
    const TrainConfig back = parse_config(in);
    EXPECT_EQ(format_config(back), text);
    EXPECT_EQ(back.lr, c.lr);
    EXPECT_EQ(back.seed, c.seed);

    // Every line of the formatted default config names a settable key.
    std::istringstream lines(format_config(TrainConfig{}));
    std::string line;
    while (std::getline(lines, line)) {
        TrainConfig scratch;
        const auto eq = line.find(" = ");
        EXPECT_NO_THROW(set_config_value(scratch, line.substr(0, eq), line.substr(eq + 3))) << line;
    }
}

TEST(Training, ConstraintHoldsAndRunsAreDeterministic) {
    const NodeDataset ds = chains(4);
    TrainConfig c = quick_config(50);
    c.dropout = 0.5;
    const TrainResult a = train(c, ds);
    const TrainResult b = train(c, ds);
    ASSERT_EQ(a.history.epochs.size(), 50u);
    EXPECT_TRUE(same_history(a.history, b.history));
    EXPECT_EQ(a.model, b.model);

    // Chains are DAGs: the radius is infinite, so also check a cyclic graph.
    const auto specs = constraint_specs(a.model, ds.adjacencies());
    EXPECT_LE(constraint_violation(a.model, specs), 1e-12);

    std::mt19937_64 rng(3);
    NodeDataset cyc = ds;
    DenseMatrix adj = ref::random_adjacency(ds.num_nodes(), 0.01, rng, true);
    cyc.graph = Graph{renormalize(SparseAdjacency::from_dense(adj)), false};
    const TrainResult r = train(c, cyc);
    const auto cspecs = constraint_specs(r.model, cyc.adjacencies());
    EXPECT_LT(cspecs[0].radius, 1.0);
    EXPECT_LE(constraint_violation(r.model, cspecs), 1e-12);
}

TEST(Training, EvaluateReproducesBestValidation) {
    const NodeDataset ds = chains(4);
    const TrainResult r = train(quick_config(40), ds);
    ASSERT_GE(r.history.best_epoch, 1u);
    const EvalReport rep = evaluate(r.model, ds, Task::node_multiclass);
    ASSERT_TRUE(rep.val.has_value());
    EXPECT_EQ(rep.val->micro_f1, r.history.best_val_f1);
    EXPECT_EQ(rep.val->micro_f1, r.history.epochs[r.history.best_epoch - 1].val_f1);
    for (const auto& e : r.history.epochs) EXPECT_LE(e.val_f1, r.history.best_val_f1);
    EXPECT_EQ(rep.test.count, 60u);
    ASSERT_TRUE(rep.test.accuracy.has_value());

    NodeDataset no_test = ds;
    no_test.splits.test.clear();
    EXPECT_THROW(evaluate(r.model, no_test, Task::node_multiclass), std::invalid_argument);
}

TEST(Training, LossDecreasesOnShortChains) {
    const NodeDataset ds = chains(2);
    const TrainResult r = train(quick_config(100), ds);
    EXPECT_LT(r.history.epochs.back().loss, r.history.epochs.front().loss);
    EXPECT_GE(evaluate(r.model, ds, Task::node_multiclass).test.micro_f1, 0.95);
}

TEST(Training, MetricsFileHasHeaderAndOneRowPerEpoch) {
    const auto dir = std::filesystem::temp_directory_path() / "ignn_test_metrics";
    std::filesystem::create_directories(dir);
    TrainConfig c = quick_config(5);
    c.metrics = dir / "m.tsv";
    std::ostringstream log;
    c.quiet = false;
    train(c, chains(2), &log);
    std::ifstream in(c.metrics);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epoch\tloss\ttrain_f1\tval_f1\tfwd_iters\tbwd_iters\tseconds");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 6);
    }
    EXPECT_EQ(rows, 5u);
    EXPECT_EQ(log.str().substr(0, 5), "epoch");
    std::filesystem::remove_all(dir);
}

TEST(Training, WarmStartAgreesWithColdStart) {
    std::mt19937_64 rng(4);
    const NodeDataset base = chains(3);
    NodeDataset ds = base;
    DenseMatrix adj = ref::random_adjacency(ds.num_nodes(), 0.02, rng, true);
    ds.graph = Graph{renormalize(SparseAdjacency::from_dense(adj)), false};
    TrainConfig c = quick_config(1);
    const TrainResult r = train(c, ds);
    IgnnModel m = r.model;
    const auto cold0 = forward(m, ds);
    m.layers[0].relations[0].W *= 0.99;
    const auto warm = forward(m, ds, {Mode::eval, nullptr, &cold0});
    const auto cold = forward(m, ds);
    // Both iterates are within tol / (1 - kappa) of the same fixed point.
    EXPECT_LE(max_abs_diff(warm.layers[0].solution.X, cold.layers[0].solution.X), 2.0 * c.tol / (1.0 - 0.95));
}

TEST(Training, LearnedFeaturesAndMultilabel) {
    NodeDataset ds = chains(2);
    ds.features.reset();
    TrainConfig c = quick_config(10);
    c.hidden = {6};
    const TrainResult r = train(c, ds);
    ASSERT_TRUE(r.model.learnable_u.has_value());
    EXPECT_EQ(r.model.learnable_u->rows(), 6u);
    EXPECT_EQ(r.model.learnable_u->cols(), ds.num_nodes());

    NodeDataset ml = chains(2);
    for (std::size_t j = 0; j < ml.num_nodes(); j += 3) ml.labels(0, j) = ml.labels(1, j) = 1.0;
    TrainConfig cm = quick_config(10);
    cm.task = Task::node_multilabel;
    EXPECT_NO_THROW(train(cm, ml));
    EXPECT_THROW(train(quick_config(10), ml), std::invalid_argument);
}

TEST(Training, GraphClassification) {
    std::mt19937_64 rng(5);
    GraphDataset data;
    data.num_classes = 2;
    for (std::size_t g = 0; g < 40; ++g) {
        const std::size_t n = 3 + g % 4;
        GraphSample s;
        DenseMatrix a = ref::random_adjacency(n, 0.5, rng, true);
        for (std::size_t i = 0; i < n; ++i) a(i, i) = 0.0;
        s.adjacency = renormalize(SparseAdjacency::from_dense(a));
        s.label = g % 2;
        s.features = ref::random_dense(2, n, rng, 0.0, 1.0);
        for (double& v : s.features.row(0)) v += s.label ? 1.0 : -1.0;
        data.graphs.push_back(std::move(s));
        (g < 20 ? data.splits.train : g < 30 ? data.splits.val : data.splits.test).push_back(g);
    }
    TrainConfig c = quick_config(60);
    c.task = Task::graph;
    c.hidden = {4};
    const TrainResult r = train(c, data);
    const EvalReport rep = evaluate(r.model, data);
    EXPECT_EQ(rep.test.count, 10u);
    EXPECT_GE(rep.test.micro_f1, 0.8);
}
