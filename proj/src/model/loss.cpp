#include "ignn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace ignn {
namespace {

void check_mask(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask,
                const char* who) {
    if (!logits.same_shape(labels)) throw DimensionError(std::string(who) + ": logits and labels differ in shape");
    if (mask.empty()) throw std::invalid_argument(std::string(who) + ": empty mask");
    for (std::size_t j : mask)
        if (j >= logits.cols()) throw std::out_of_range(std::string(who) + ": mask index out of range");
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

LossResult softmax_xent_masked(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    check_mask(logits, labels, mask, "softmax_xent_masked");
    LossResult out{0.0, DenseMatrix(logits.rows(), logits.cols())};
    const double scale = 1.0 / static_cast<double>(mask.size());
    const std::size_t c = logits.rows();
    std::vector<double> p(c);
    for (std::size_t j : mask) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) top = std::max(top, logits(k, j));
        double denom = 0.0;
        for (std::size_t k = 0; k < c; ++k) denom += (p[k] = std::exp(logits(k, j) - top));
        const double log_denom = std::log(denom);
        for (std::size_t k = 0; k < c; ++k) {
            const double y = labels(k, j);
            if (y != 0.0) out.loss -= y * (logits(k, j) - top - log_denom);
            out.grad(k, j) = scale * (p[k] / denom - y);
        }
    }
    out.loss *= scale;
    return out;
}

LossResult bce_multilabel(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    check_mask(logits, labels, mask, "bce_multilabel");
    LossResult out{0.0, DenseMatrix(logits.rows(), logits.cols())};
    const double scale = 1.0 / static_cast<double>(mask.size() * logits.rows());
    for (std::size_t j : mask) {
        for (std::size_t k = 0; k < logits.rows(); ++k) {
            const double z = logits(k, j);
            const double y = labels(k, j);
            // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
            out.loss += softplus(z) - y * z;
            out.grad(k, j) = scale * (sigmoid(z) - y);
        }
    }
    out.loss *= scale;
    return out;
}

DenseMatrix binarize_argmax(const DenseMatrix& logits) {
    DenseMatrix out(logits.rows(), logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < logits.rows(); ++k)
            if (logits(k, j) > logits(best, j)) best = k;
        if (logits.rows()) out(best, j) = 1.0;
    }
    return out;
}

DenseMatrix binarize_threshold(const DenseMatrix& logits) {
    DenseMatrix out(logits.rows(), logits.cols());
    for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] = logits.values()[k] > 0.0 ? 1.0 : 0.0;
    return out;
}

double micro_f1(const DenseMatrix& pred, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    check_mask(pred, labels, mask, "micro_f1");
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t j : mask)
        for (std::size_t k = 0; k < pred.rows(); ++k) {
            const bool p = pred(k, j) != 0.0;
            const bool y = labels(k, j) != 0.0;
            tp += p && y;
            fp += p && !y;
            fn += !p && y;
        }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

double macro_f1(const DenseMatrix& pred, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    check_mask(pred, labels, mask, "macro_f1");
    if (pred.rows() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < pred.rows(); ++k) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        for (std::size_t j : mask) {
            const bool p = pred(k, j) != 0.0;
            const bool y = labels(k, j) != 0.0;
            tp += p && y;
            fp += p && !y;
            fn += !p && y;
        }
        if (tp + fn > 0.0) total += 2.0 * tp / (2.0 * tp + fp + fn);
    }
    return total / static_cast<double>(pred.rows());
}

double accuracy(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask) {
    check_mask(logits, labels, mask, "accuracy");
    const DenseMatrix pred = binarize_argmax(logits);
    const DenseMatrix truth = binarize_argmax(labels);
    std::size_t hits = 0;
    for (std::size_t j : mask) {
        bool same = true;
        for (std::size_t k = 0; k < pred.rows(); ++k) same = same && pred(k, j) == truth(k, j);
        hits += same;
    }
    return static_cast<double>(hits) / static_cast<double>(mask.size());
}

}  // namespace ignn
