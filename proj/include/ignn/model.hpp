#pragma once

// Implicit GNN model: a stack of equilibrium layers
//   X_l = phi_l( sum_i W_{l,i} X_l A_i + b_{Omega_l}(U_l) ),  U_1 = U,  U_l = X_{l-1} (or psi(M X_{l-1} + c)),
// followed by an optional graph readout and an output head.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ignn/activation.hpp"
#include "ignn/equilibrium.hpp"
#include "ignn/graph.hpp"
#include "ignn/implicit_grad.hpp"
#include "ignn/offset.hpp"
#include "ignn/wellposed.hpp"

namespace ignn {

enum class Readout { node, graph_sum, graph_mean };
enum class HeadKind { linear, mlp };

std::string to_string(Readout r);
Readout parse_readout(const std::string& text);

struct IgnnLayer {
    std::vector<RelationParams> relations;  // one per adjacency
    BForm b_form = BForm::omega_ua;
    ActivationMap activation = Activation::relu();
    std::vector<double> kappa;  // one per relation

    std::size_t state_dim() const { return relations.front().W.rows(); }
    std::size_t input_dim() const;

    friend bool operator==(const IgnnLayer&, const IgnnLayer&) = default;
};

// Node-wise affine map with activation placed between two equilibrium layers.
struct InterLayerMap {
    DenseMatrix weight;  // p_next x m_prev
    DenseMatrix bias;    // p_next x 1
    Activation act = Activation::relu();

    friend bool operator==(const InterLayerMap&, const InterLayerMap&) = default;
};

struct OutputHead {
    HeadKind kind = HeadKind::linear;
    DenseMatrix theta;   // linear: c x m; mlp: h x m
    DenseMatrix bias1;   // mlp only: h x 1
    Activation act = Activation::relu();
    DenseMatrix theta2;  // mlp only: c x h
    DenseMatrix bias2;   // mlp only: c x 1

    std::size_t output_dim() const { return kind == HeadKind::linear ? theta.rows() : theta2.rows(); }

    friend bool operator==(const OutputHead&, const OutputHead&) = default;
};

struct IgnnModel {
    std::vector<IgnnLayer> layers;
    std::vector<std::optional<InterLayerMap>> inter;  // inter[l] feeds layer l+1; empty or size L-1
    OutputHead head;
    Readout readout = Readout::node;
    std::optional<DenseMatrix> learnable_u;  // p x n when the dataset has no features
    double dropout_rate = 0.0;
    SolveOptions forward_solve;
    SolveOptions backward_solve;

    std::size_t relation_count() const { return layers.empty() ? 0 : layers.front().relations.size(); }
    const InterLayerMap* inter_before(std::size_t layer) const;
    // Throws DimensionError when layer/head/inter-map dimensions do not chain.
    void validate() const;

    friend bool operator==(const IgnnModel&, const IgnnModel&) = default;
};

// Every tensor of the model in a fixed order with a stable name; empty
// optional tensors are skipped. Shared by the optimizer and the checkpoint format.
std::vector<std::pair<std::string, DenseMatrix*>> named_tensors(IgnnModel& model);
std::vector<std::pair<std::string, const DenseMatrix*>> named_tensors(const IgnnModel& model);

// Same structure with all tensors zeroed; used as the gradient container.
IgnnModel zeros_like(const IgnnModel& model);

struct ModelSpec {
    std::size_t input_dim = 0;                 // p
    std::vector<std::size_t> hidden{16};       // state dim per layer
    std::size_t output_dim = 2;                // c
    std::size_t relations = 1;
    BForm b_form = BForm::omega_ua;
    Activation activation = Activation::relu();
    std::vector<double> kappa{0.95};           // per layer; a single value is broadcast
    std::vector<double> relation_kappas;       // N > 1: kappa_i per relation (default kappa / N)
    bool inter_layer_maps = false;
    Activation inter_activation = Activation::relu();
    HeadKind head = HeadKind::linear;
    std::size_t head_hidden = 16;
    Activation head_activation = Activation::relu();
    Readout readout = Readout::node;
    std::optional<std::size_t> learnable_nodes;  // set to n to learn a p x n feature matrix
    double dropout = 0.0;
    SolveOptions forward_solve;
    SolveOptions backward_solve;
};

// Uniform init in [-1/sqrt(m), 1/sqrt(m)] (m = layer state dim; head hidden dim for the
// second head affine), learnable U in [-1/sqrt(p), 1/sqrt(p)].
IgnnModel init_model(const ModelSpec& spec, std::uint64_t seed);

enum class Mode { train, eval };

struct LayerCache {
    DenseMatrix input;      // U_l as fed to the offset
    DenseMatrix inter_pre;  // pre-activation of the inter-layer map feeding this layer, if any
    EquilibriumSolution solution;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    DenseMatrix dropout_mask;  // m x n with entries 0 or 1/(1-p); empty when no dropout applied
    DenseMatrix head_input;    // after dropout and readout
    DenseMatrix head_pre;      // mlp head pre-activation
    DenseMatrix head_hidden;   // mlp head activation output
    DenseMatrix predictions;   // c x n (node) or c x 1 (graph)
    std::size_t forward_iterations = 0;
};

struct ForwardOptions {
    Mode mode = Mode::eval;
    std::mt19937_64* rng = nullptr;            // required for dropout in train mode
    const ForwardCache* warm_start = nullptr;  // previous solutions used as X0 when shapes match
};

// features == nullptr selects model.learnable_u.
ForwardCache forward(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As,
                     const DenseMatrix* features, const ForwardOptions& opts = {});
ForwardCache forward(const IgnnModel& model, const NodeDataset& data, const ForwardOptions& opts = {});

struct ModelGradients {
    IgnnModel grad;  // zeros_like(model) filled with dL/dtheta
    std::vector<std::size_t> layer_iterations;
    std::size_t backward_iterations = 0;
    std::optional<DenseMatrix> grad_features;  // dL/dU for supplied (non-learnable) features
};

ModelGradients backward(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As,
                        const DenseMatrix* features, const ForwardCache& cache, const DenseMatrix& grad_predictions);
ModelGradients backward(const IgnnModel& model, const NodeDataset& data, const ForwardCache& cache,
                        const DenseMatrix& grad_predictions);

// Explicit two-layer GCN  Y = W2 phi1(W1 U A) A  written as one equilibrium layer over
// the stacked state (X2; X1) with a strictly upper-triangular block W.
IgnnModel gcn_as_ignn(const DenseMatrix& W1, const DenseMatrix& W2, const Activation& phi1);

// Diagonal rescaling of one single-relation layer; the head or the next layer's
// input weights absorb S^{-1}. Requires positively homogeneous activations.
IgnnModel rescale_model(const IgnnModel& model, std::size_t layer, Rescaling* info = nullptr);

// Per-layer constraint specs for a graph (cached lambda_pf(A) or per-relation norms).
std::vector<ConstraintSpec> constraint_specs(const IgnnModel& model, const std::vector<const SparseAdjacency*>& As);
// Project every W onto its constraint set.
void project_model(IgnnModel& model, const std::vector<ConstraintSpec>& specs);
// Largest violation max(0, ||W||_inf - radius) over all layers and relations.
double constraint_violation(const IgnnModel& model, const std::vector<ConstraintSpec>& specs);

}  // namespace ignn
