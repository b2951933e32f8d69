#pragma once

#include <string>
#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

// Component-wise non-expansive activation.
struct Activation {
    enum class Kind { relu, leaky_relu, tanh, sigmoid, identity };

    Kind kind = Kind::relu;
    double slope = 0.0;  // leaky_relu only, in [0, 1]

    static Activation relu() { return {Kind::relu, 0.0}; }
    static Activation leaky_relu(double slope);
    static Activation tanh() { return {Kind::tanh, 0.0}; }
    static Activation sigmoid() { return {Kind::sigmoid, 0.0}; }
    static Activation identity() { return {Kind::identity, 0.0}; }

    double operator()(double z) const;
    // ReLU'(0) = 0 and leaky'(0) = slope.
    double derivative(double z) const;
    // phi(a x) = a phi(x) for a >= 0
    bool positively_homogeneous() const;

    std::string name() const;
    // Accepts "relu", "tanh", "sigmoid", "identity", "leaky_relu" or "leaky_relu:0.1".
    static Activation parse(const std::string& text);

    friend bool operator==(const Activation&, const Activation&) = default;
};

DenseMatrix apply(const Activation& phi, const DenseMatrix& z);
DenseMatrix derivative(const Activation& phi, const DenseMatrix& z);

// Activation chosen per contiguous block of state rows. The stacked
// formulations (multi-layer as one layer, GCN as IGNN) need a different
// activation on each block; an ordinary layer has one segment covering all rows.
class ActivationMap {
public:
    struct Segment {
        std::size_t rows;
        Activation phi;

        friend bool operator==(const Segment&, const Segment&) = default;
    };

    ActivationMap() = default;
    ActivationMap(Activation phi) : uniform_(phi) {}  // NOLINT: implicit on purpose
    explicit ActivationMap(std::vector<Segment> segments);

    bool uniform() const { return segments_.empty(); }
    const Activation& uniform_activation() const { return uniform_; }
    const std::vector<Segment>& segments() const { return segments_; }
    // Activation applied to state row r.
    const Activation& at_row(std::size_t r) const;
    bool positively_homogeneous() const;

    DenseMatrix apply(const DenseMatrix& z) const;
    DenseMatrix derivative(const DenseMatrix& z) const;

    friend bool operator==(const ActivationMap&, const ActivationMap&) = default;

private:
    void check_rows(std::size_t rows) const;

    Activation uniform_ = Activation::relu();
    std::vector<Segment> segments_;
};

}  // namespace ignn
