#pragma once

#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

struct SgdOptions {
    double lr = 0.01;
    double momentum = 0.0;
};

struct AdamOptions {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter moment buffers; allocated lazily on the first step.
struct OptimizerState {
    std::size_t step = 0;
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;
};

// buffer = momentum * buffer + g; params[k] -= lr * buffer
void sgd_step(const std::vector<DenseMatrix*>& params, const std::vector<const DenseMatrix*>& grads,
              OptimizerState& state, const SgdOptions& opts);

// Adam with bias-corrected first and second moments.
void adam_step(const std::vector<DenseMatrix*>& params, const std::vector<const DenseMatrix*>& grads,
               OptimizerState& state, const AdamOptions& opts);

}  // namespace ignn
