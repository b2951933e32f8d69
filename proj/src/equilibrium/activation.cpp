#include "ignn/activation.hpp"

#include <charconv>
#include <cmath>

namespace ignn {

Activation Activation::leaky_relu(double slope) {
    if (!(slope >= 0.0 && slope <= 1.0)) throw std::invalid_argument("leaky_relu slope must lie in [0, 1]");
    return {Kind::leaky_relu, slope};
}

double Activation::operator()(double z) const {
    switch (kind) {
        case Kind::relu: return z > 0.0 ? z : 0.0;
        case Kind::leaky_relu: return z > 0.0 ? z : slope * z;
        case Kind::tanh: return std::tanh(z);
        case Kind::sigmoid: return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        case Kind::identity: return z;
    }
    return z;
}

double Activation::derivative(double z) const {
    switch (kind) {
        case Kind::relu: return z > 0.0 ? 1.0 : 0.0;
        case Kind::leaky_relu: return z > 0.0 ? 1.0 : slope;
        case Kind::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Kind::sigmoid: {
            const double s = (*this)(z);
            return s * (1.0 - s);
        }
        case Kind::identity: return 1.0;
    }
    return 1.0;
}

bool Activation::positively_homogeneous() const {
    return kind == Kind::relu || kind == Kind::leaky_relu || kind == Kind::identity;
}

std::string Activation::name() const {
    switch (kind) {
        case Kind::relu: return "relu";
        case Kind::leaky_relu: {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof buf, slope);
            return "leaky_relu:" + std::string(buf, res.ptr);
        }
        case Kind::tanh: return "tanh";
        case Kind::sigmoid: return "sigmoid";
        case Kind::identity: return "identity";
    }
    return "?";
}

Activation Activation::parse(const std::string& text) {
    if (text == "relu") return relu();
    if (text == "tanh") return tanh();
    if (text == "sigmoid") return sigmoid();
    if (text == "identity") return identity();
    if (text == "leaky_relu") return leaky_relu(0.01);
    if (text.rfind("leaky_relu:", 0) == 0) return leaky_relu(std::stod(text.substr(11)));
    throw std::invalid_argument("unknown activation '" + text + "'");
}

DenseMatrix apply(const Activation& phi, const DenseMatrix& z) {
    DenseMatrix out = z;
    for (double& v : out.values()) v = phi(v);
    return out;
}

DenseMatrix derivative(const Activation& phi, const DenseMatrix& z) {
    DenseMatrix out = z;
    for (double& v : out.values()) v = phi.derivative(v);
    return out;
}

ActivationMap::ActivationMap(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("ActivationMap: no segments");
}

void ActivationMap::check_rows(std::size_t rows) const {
    if (uniform()) return;
    std::size_t total = 0;
    for (const auto& s : segments_) total += s.rows;
    if (total != rows) {
        throw DimensionError("ActivationMap: segments cover " + std::to_string(total) + " rows, state has " +
                             std::to_string(rows));
    }
}

const Activation& ActivationMap::at_row(std::size_t r) const {
    if (uniform()) return uniform_;
    for (const auto& s : segments_) {
        if (r < s.rows) return s.phi;
        r -= s.rows;
    }
    throw std::out_of_range("ActivationMap::at_row");
}

bool ActivationMap::positively_homogeneous() const {
    if (uniform()) return uniform_.positively_homogeneous();
    for (const auto& s : segments_)
        if (!s.phi.positively_homogeneous()) return false;
    return true;
}

DenseMatrix ActivationMap::apply(const DenseMatrix& z) const {
    if (uniform()) return ignn::apply(uniform_, z);
    check_rows(z.rows());
    DenseMatrix out = z;
    std::size_t r = 0;
    for (const auto& s : segments_)
        for (std::size_t k = 0; k < s.rows; ++k, ++r)
            for (double& v : out.row(r)) v = s.phi(v);
    return out;
}

DenseMatrix ActivationMap::derivative(const DenseMatrix& z) const {
    if (uniform()) return ignn::derivative(uniform_, z);
    check_rows(z.rows());
    DenseMatrix out = z;
    std::size_t r = 0;
    for (const auto& s : segments_)
        for (std::size_t k = 0; k < s.rows; ++k, ++r)
            for (double& v : out.row(r)) v = s.phi.derivative(v);
    return out;
}

}  // namespace ignn
