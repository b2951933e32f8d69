#include "ignn/model.hpp"

#include <cmath>

namespace ignn {

std::string to_string(Readout r) {
    switch (r) {
        case Readout::node: return "node";
        case Readout::graph_sum: return "graph_sum";
        case Readout::graph_mean: return "graph_mean";
    }
    return "?";
}

Readout parse_readout(const std::string& text) {
    if (text == "node") return Readout::node;
    if (text == "graph_sum" || text == "sum") return Readout::graph_sum;
    if (text == "graph_mean" || text == "mean") return Readout::graph_mean;
    throw std::invalid_argument("unknown readout '" + text + "'");
}

std::size_t IgnnLayer::input_dim() const {
    const auto& r = relations.front();
    return uses_ua(b_form) ? r.omega_a.cols() : r.omega_b.cols();
}

const InterLayerMap* IgnnModel::inter_before(std::size_t layer) const {
    if (layer == 0 || inter.empty()) return nullptr;
    const auto& m = inter[layer - 1];
    return m ? &*m : nullptr;
}

void IgnnModel::validate() const {
    if (layers.empty()) throw DimensionError("model: no layers");
    if (!inter.empty() && inter.size() != layers.size() - 1) throw DimensionError("model: inter-layer map count");
    const std::size_t N = layers.front().relations.size();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const std::string where = "model: layer " + std::to_string(l);
        if (layer.relations.size() != N || N == 0) throw DimensionError(where + " relation count");
        if (layer.kappa.size() != N) throw DimensionError(where + " needs one kappa per relation");
        const std::size_t m = layer.state_dim();
        const std::size_t p = layer.input_dim();
        for (const auto& r : layer.relations) {
            if (r.W.rows() != m || r.W.cols() != m) throw DimensionError(where + " W shape");
            if (uses_ua(layer.b_form) && (r.omega_a.rows() != m || r.omega_a.cols() != p))
                throw DimensionError(where + " omega_a shape");
            if (uses_u(layer.b_form) && (r.omega_b.rows() != m || r.omega_b.cols() != p))
                throw DimensionError(where + " omega_b shape");
        }
        if (l > 0) {
            const std::size_t prev = layers[l - 1].state_dim();
            if (const auto* map = inter_before(l)) {
                if (map->weight.cols() != prev || map->weight.rows() != p || map->bias.rows() != p || map->bias.cols() != 1)
                    throw DimensionError(where + " inter-layer map shape");
            } else if (p != prev) {
                throw DimensionError(where + " input dim " + std::to_string(p) + " != previous state dim " +
                                     std::to_string(prev));
            }
        }
    }
    const std::size_t m = layers.back().state_dim();
    if (head.theta.cols() != m) throw DimensionError("model: head input dim");
    if (head.kind == HeadKind::mlp) {
        const std::size_t h = head.theta.rows();
        if (head.bias1.rows() != h || head.bias1.cols() != 1 || head.theta2.cols() != h ||
            head.bias2.rows() != head.theta2.rows() || head.bias2.cols() != 1)
            throw DimensionError("model: mlp head shapes");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("model: dropout must lie in [0, 1)");
}

namespace {

template <class Model, class Out>
void collect(Model& model, Out& out) {
    auto add = [&](std::string name, auto& t) {
        if (!t.empty()) out.emplace_back(std::move(name), &t);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.relations.size(); ++i) {
            const std::string base = "layer" + std::to_string(l) + ".rel" + std::to_string(i) + ".";
            add(base + "W", layer.relations[i].W);
            add(base + "omega_a", layer.relations[i].omega_a);
            add(base + "omega_b", layer.relations[i].omega_b);
        }
    }
    for (std::size_t l = 0; l < model.inter.size(); ++l) {
        if (!model.inter[l]) continue;
        const std::string base = "inter" + std::to_string(l) + ".";
        add(base + "weight", model.inter[l]->weight);
        add(base + "bias", model.inter[l]->bias);
    }
    add("head.theta", model.head.theta);
    add("head.bias1", model.head.bias1);
    add("head.theta2", model.head.theta2);
    add("head.bias2", model.head.bias2);
    if (model.learnable_u) add("learnable_u", *model.learnable_u);
}

DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

DenseMatrix row_sums(const DenseMatrix& m) {
    DenseMatrix s(m.rows(), 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (double v : m.row(i)) acc += v;
        s(i, 0) = acc;
    }
    return s;
}

// M + b 1^T
DenseMatrix add_bias(DenseMatrix m, const DenseMatrix& b) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (double& v : m.row(i)) v += b(i, 0);
    return m;
}

}  // namespace

std::vector<std::pair<std::string, DenseMatrix*>> named_tensors(IgnnModel& model) {
    std::vector<std::pair<std::string, DenseMatrix*>> out;
    collect(model, out);
    return out;
}

std::vector<std::pair<std::string, const DenseMatrix*>> named_tensors(const IgnnModel& model) {
    std::vector<std::pair<std::string, const DenseMatrix*>> out;
    collect(model, out);
    return out;
}

IgnnModel zeros_like(const IgnnModel& model) {
    IgnnModel z = model;
    for (auto& [name, t] : named_tensors(z)) *t = DenseMatrix(t->rows(), t->cols());
    return z;
}

IgnnModel init_model(const ModelSpec& spec, std::uint64_t seed) {
    if (spec.hidden.empty()) throw std::invalid_argument("init_model: at least one layer");
    if (spec.relations == 0) throw std::invalid_argument("init_model: at least one relation");
    if (spec.kappa.size() != 1 && spec.kappa.size() != spec.hidden.size())
        throw std::invalid_argument("init_model: kappa must have 1 or one-per-layer entries");
    if (spec.relations > 1 && !spec.relation_kappas.empty() && spec.relation_kappas.size() != spec.relations)
        throw std::invalid_argument("init_model: relation_kappas must have one entry per relation");
    std::mt19937_64 rng(seed);
    IgnnModel model;
    model.dropout_rate = spec.dropout;
    model.readout = spec.readout;
    model.forward_solve = spec.forward_solve;
    model.backward_solve = spec.backward_solve;

    std::size_t in_dim = spec.input_dim;
    for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
        const std::size_t m = spec.hidden[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(m));
        if (l > 0 && spec.inter_layer_maps) {
            if (model.inter.empty()) model.inter.resize(spec.hidden.size() - 1);
            InterLayerMap map{uniform_matrix(in_dim, in_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng),
                              DenseMatrix(in_dim, 1), spec.inter_activation};
            model.inter[l - 1] = std::move(map);
        }
        IgnnLayer layer;
        layer.b_form = spec.b_form;
        layer.activation = spec.activation;
        const double k = spec.kappa.size() == 1 ? spec.kappa.front() : spec.kappa[l];
        for (std::size_t i = 0; i < spec.relations; ++i) {
            RelationParams r;
            r.W = uniform_matrix(m, m, bound, rng);
            if (uses_ua(spec.b_form)) r.omega_a = uniform_matrix(m, in_dim, bound, rng);
            if (uses_u(spec.b_form)) r.omega_b = uniform_matrix(m, in_dim, bound, rng);
            layer.relations.push_back(std::move(r));
            if (spec.relations == 1) layer.kappa.push_back(k);
            else layer.kappa.push_back(spec.relation_kappas.empty() ? k / static_cast<double>(spec.relations)
                                                                    : spec.relation_kappas[i]);
        }
        model.layers.push_back(std::move(layer));
        in_dim = m;
    }
    const std::size_t m = spec.hidden.back();
    const double bound = 1.0 / std::sqrt(static_cast<double>(m));
    model.head.kind = spec.head;
    if (spec.head == HeadKind::linear) {
        model.head.theta = uniform_matrix(spec.output_dim, m, bound, rng);
    } else {
        model.head.theta = uniform_matrix(spec.head_hidden, m, bound, rng);
        model.head.bias1 = DenseMatrix(spec.head_hidden, 1);
        model.head.act = spec.head_activation;
        model.head.theta2 =
            uniform_matrix(spec.output_dim, spec.head_hidden, 1.0 / std::sqrt(static_cast<double>(spec.head_hidden)), rng);
        model.head.bias2 = DenseMatrix(spec.output_dim, 1);
    }
    if (spec.learnable_nodes) {
        model.learnable_u = uniform_matrix(spec.input_dim, *spec.learnable_nodes,
                                           1.0 / std::sqrt(static_cast<double>(spec.input_dim)), rng);
    }
    model.validate();
    return model;
}

ForwardCache forward(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As,
                     const DenseMatrix* features, const ForwardOptions& opts) {
    const DenseMatrix* U = features ? features : (model.learnable_u ? &*model.learnable_u : nullptr);
    if (!U) throw std::invalid_argument("forward: no features supplied and the model has no learnable U");
    if (As.size() != model.relation_count()) {
        throw DimensionError("forward: model expects " + std::to_string(model.relation_count()) + " relations, got " +
                             std::to_string(As.size()));
    }
    if (U->rows() != model.layers.front().input_dim()) throw DimensionError("forward: feature dimension mismatch");

    ForwardCache cache;
    const DenseMatrix* input = U;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        LayerCache lc;
        if (const auto* map = model.inter_before(l)) {
            lc.inter_pre = add_bias(matmul(map->weight, *input), map->bias);
            lc.input = apply(map->act, lc.inter_pre);
        } else {
            lc.input = *input;
        }
        const DenseMatrix B = compute_offset(layer.b_form, layer.relations, As, lc.input);
        const DenseMatrix* x0 = nullptr;
        if (opts.warm_start && opts.warm_start->layers.size() == model.layers.size()) {
            const DenseMatrix& prev = opts.warm_start->layers[l].solution.X;
            if (prev.same_shape(B)) x0 = &prev;
        }
        try {
            lc.solution = solve_forward_hetero(weights_of(layer.relations), As, B, layer.activation, model.forward_solve, x0);
        } catch (const NonConvergence& e) {
            throw e.with_context("layer " + std::to_string(l));
        }
        cache.forward_iterations += lc.solution.iterations;
        cache.layers.push_back(std::move(lc));
        input = &cache.layers.back().solution.X;
    }

    DenseMatrix state = cache.layers.back().solution.X;
    if (opts.mode == Mode::train && model.dropout_rate > 0.0) {
        if (!opts.rng) throw std::invalid_argument("forward: train-mode dropout needs an rng");
        std::bernoulli_distribution keep(1.0 - model.dropout_rate);
        const double scale = 1.0 / (1.0 - model.dropout_rate);
        cache.dropout_mask = DenseMatrix(state.rows(), state.cols());
        for (double& v : cache.dropout_mask.values()) v = keep(*opts.rng) ? scale : 0.0;
        state = hadamard(state, cache.dropout_mask);
    }
    switch (model.readout) {
        case Readout::node: cache.head_input = std::move(state); break;
        case Readout::graph_sum: cache.head_input = row_sums(state); break;
        case Readout::graph_mean:
            cache.head_input = row_sums(state);
            cache.head_input *= 1.0 / static_cast<double>(std::max<std::size_t>(1, state.cols()));
            break;
    }
    if (model.head.kind == HeadKind::linear) {
        cache.predictions = matmul(model.head.theta, cache.head_input);
    } else {
        cache.head_pre = add_bias(matmul(model.head.theta, cache.head_input), model.head.bias1);
        cache.head_hidden = apply(model.head.act, cache.head_pre);
        cache.predictions = add_bias(matmul(model.head.theta2, cache.head_hidden), model.head.bias2);
    }
    return cache;
}

ForwardCache forward(const IgnnModel& model, const NodeDataset& data, const ForwardOptions& opts) {
    return forward(model, data.adjacencies(), data.features ? &*data.features : nullptr, opts);
}

ModelGradients backward(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As,
                        const DenseMatrix* features, const ForwardCache& cache, const DenseMatrix& grad_predictions) {
    if (cache.layers.size() != model.layers.size()) throw std::invalid_argument("backward: cache from another model");
    if (!grad_predictions.same_shape(cache.predictions)) throw DimensionError("backward: gradient shape");
    ModelGradients out;
    out.grad = zeros_like(model);
    auto& g = out.grad;

    // Head.
    DenseMatrix grad_head_input;
    if (model.head.kind == HeadKind::linear) {
        g.head.theta = matmul_nt(grad_predictions, cache.head_input);
        grad_head_input = matmul_tn(model.head.theta, grad_predictions);
    } else {
        g.head.theta2 = matmul_nt(grad_predictions, cache.head_hidden);
        g.head.bias2 = row_sums(grad_predictions);
        const DenseMatrix grad_pre =
            hadamard(matmul_tn(model.head.theta2, grad_predictions), derivative(model.head.act, cache.head_pre));
        g.head.theta = matmul_nt(grad_pre, cache.head_input);
        g.head.bias1 = row_sums(grad_pre);
        grad_head_input = matmul_tn(model.head.theta, grad_pre);
    }

    // Readout and dropout.
    const DenseMatrix& XL = cache.layers.back().solution.X;
    DenseMatrix grad_state;
    if (model.readout == Readout::node) {
        grad_state = std::move(grad_head_input);
    } else {
        const double w = model.readout == Readout::graph_mean ? 1.0 / static_cast<double>(std::max<std::size_t>(1, XL.cols())) : 1.0;
        grad_state = DenseMatrix(XL.rows(), XL.cols());
        for (std::size_t i = 0; i < XL.rows(); ++i)
            for (double& v : grad_state.row(i)) v = w * grad_head_input(i, 0);
    }
    if (!cache.dropout_mask.empty()) grad_state = hadamard(grad_state, cache.dropout_mask);

    // Equilibrium layers, last to first.
    const bool learn_u = features == nullptr;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        const auto& lc = cache.layers[l];
        AdjointSolution adj;
        try {
            adj = solve_backward_hetero(weights_of(layer.relations), As, lc.solution.D, grad_state, model.backward_solve);
        } catch (const NonConvergence& e) {
            throw e.with_context("layer " + std::to_string(l));
        }
        out.layer_iterations.insert(out.layer_iterations.begin(), adj.iterations);
        out.backward_iterations += adj.iterations;
        GradientBundle bundle = param_grads(adj.G, lc.solution.X, As, lc.input, layer.relations, layer.b_form, true);
        g.layers[l].relations = std::move(bundle.grad);
        DenseMatrix grad_input = std::move(*bundle.grad_U);
        if (const auto* map = model.inter_before(l)) {
            const DenseMatrix& prev = cache.layers[l - 1].solution.X;
            const DenseMatrix grad_pre = hadamard(grad_input, derivative(map->act, lc.inter_pre));
            g.inter[l - 1]->weight = matmul_nt(grad_pre, prev);
            g.inter[l - 1]->bias = row_sums(grad_pre);
            grad_input = matmul_tn(map->weight, grad_pre);
        }
        if (l > 0) {
            grad_state = std::move(grad_input);
        } else if (learn_u) {
            *g.learnable_u = std::move(grad_input);
        } else {
            out.grad_features = std::move(grad_input);
        }
    }
    return out;
}

ModelGradients backward(const IgnnModel& model, const NodeDataset& data, const ForwardCache& cache,
                        const DenseMatrix& grad_predictions) {
    return backward(model, data.adjacencies(), data.features ? &*data.features : nullptr, cache, grad_predictions);
}

IgnnModel gcn_as_ignn(const DenseMatrix& W1, const DenseMatrix& W2, const Activation& phi1) {
    const std::size_t h = W1.rows();
    const std::size_t p = W1.cols();
    const std::size_t c = W2.rows();
    if (W2.cols() != h) throw DimensionError("gcn_as_ignn: W2 must have W1.rows() columns");
    const std::size_t m = c + h;

    RelationParams rel;
    rel.W = DenseMatrix(m, m);
    rel.W.set_block(0, c, W2);
    rel.omega_a = DenseMatrix(m, p);
    rel.omega_a.set_block(c, 0, W1);

    IgnnLayer layer;
    layer.relations.push_back(std::move(rel));
    layer.b_form = BForm::omega_ua;
    // State (X2; X1): identity on the output block, phi1 on the hidden block.
    layer.activation = ActivationMap(std::vector<ActivationMap::Segment>{{c, Activation::identity()}, {h, phi1}});
    layer.kappa = {0.0};

    IgnnModel model;
    model.layers.push_back(std::move(layer));
    model.head.kind = HeadKind::linear;
    model.head.theta = DenseMatrix(c, m);
    for (std::size_t i = 0; i < c; ++i) model.head.theta(i, i) = 1.0;
    model.validate();
    return model;
}

IgnnModel rescale_model(const IgnnModel& model, std::size_t layer, Rescaling* info) {
    if (layer >= model.layers.size()) throw std::out_of_range("rescale_model: layer index");
    const auto& src = model.layers[layer];
    if (src.relations.size() != 1) throw std::invalid_argument("rescale_model: only single-relation layers");
    if (!src.activation.positively_homogeneous()) {
        throw std::invalid_argument("rescale_model: activation must be positively homogeneous");
    }
    Rescaling r = rescale(src.relations.front().W);
    IgnnModel out = model;
    auto& rel = out.layers[layer].relations.front();
    rel.W = r.W;
    if (!rel.omega_a.empty()) rel.omega_a = scale_rows(rel.omega_a, r.scale);
    if (!rel.omega_b.empty()) rel.omega_b = scale_rows(rel.omega_b, r.scale);
    if (layer + 1 == model.layers.size()) {
        out.head.theta = scale_columns_inverse(out.head.theta, r.scale);
    } else if (auto* map = out.inter.empty() ? nullptr : &out.inter[layer]; map && *map) {
        (*map)->weight = scale_columns_inverse((*map)->weight, r.scale);
    } else {
        for (auto& next : out.layers[layer + 1].relations) {
            if (!next.omega_a.empty()) next.omega_a = scale_columns_inverse(next.omega_a, r.scale);
            if (!next.omega_b.empty()) next.omega_b = scale_columns_inverse(next.omega_b, r.scale);
        }
    }
    if (info) *info = std::move(r);
    return out;
}

std::vector<ConstraintSpec> constraint_specs(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As) {
    std::vector<ConstraintSpec> specs;
    for (const auto& layer : model.layers) specs.push_back(ConstraintSpec::for_relations(layer.kappa, As));
    return specs;
}

void project_model(IgnnModel& model, const std::vector<ConstraintSpec>& specs) {
    if (specs.size() != model.layers.size()) throw std::invalid_argument("project_model: one spec per layer");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto projected = project_relations(weights_of(model.layers[l].relations), specs[l]);
        for (std::size_t i = 0; i < projected.size(); ++i) model.layers[l].relations[i].W = std::move(projected[i]);
    }
}

double constraint_violation(const IgnnModel& model, const std::vector<ConstraintSpec>& specs) {
    double worst = 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& rels = model.layers[l].relations;
        for (std::size_t i = 0; i < rels.size(); ++i) {
            const double radius = specs[l].relation_radii.empty() ? specs[l].radius : specs[l].relation_radii[i];
            worst = std::max(worst, inf_norm(rels[i].W) - radius);
        }
    }
    return worst;
}

}  // namespace ignn
