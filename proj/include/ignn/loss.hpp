#pragma once

#include <span>
#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

struct LossResult {
    double loss = 0.0;
    DenseMatrix grad;  // dLoss/dLogits, zero outside the mask
};

// Mean softmax cross-entropy over the masked columns (one node per column).
LossResult softmax_xent_masked(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask);

// Mean elementwise sigmoid cross-entropy over masked columns and all classes.
LossResult bce_multilabel(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask);

// One-hot argmax per column; ties resolve to the lowest class index.
DenseMatrix binarize_argmax(const DenseMatrix& logits);
// 1 where logit > 0 (sigmoid > 0.5).
DenseMatrix binarize_threshold(const DenseMatrix& logits);

// Pooled TP/FP/FN over all classes of the masked columns.
double micro_f1(const DenseMatrix& pred, const DenseMatrix& labels, std::span<const std::size_t> mask);
// Unweighted mean of per-class F1; a class without positive labels scores 0.
double macro_f1(const DenseMatrix& pred, const DenseMatrix& labels, std::span<const std::size_t> mask);
// Fraction of masked columns whose argmax matches the label argmax.
double accuracy(const DenseMatrix& logits, const DenseMatrix& labels, std::span<const std::size_t> mask);

}  // namespace ignn
