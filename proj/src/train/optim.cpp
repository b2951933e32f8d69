#include "ignn/optim.hpp"

#include <cmath>

namespace ignn {
namespace {

void prepare(const std::vector<DenseMatrix*>& params, const std::vector<const DenseMatrix*>& grads,
             OptimizerState& state, bool second_moment) {
    if (params.size() != grads.size()) throw DimensionError("optimizer: parameter and gradient counts differ");
    for (std::size_t k = 0; k < params.size(); ++k)
        if (!params[k]->same_shape(*grads[k])) throw DimensionError("optimizer: gradient shape mismatch");
    if (state.m.empty()) {
        for (const auto* p : params) {
            state.m.emplace_back(p->rows(), p->cols());
            if (second_moment) state.v.emplace_back(p->rows(), p->cols());
        }
    }
    if (state.m.size() != params.size()) throw DimensionError("optimizer: state belongs to another parameter set");
}

}  // namespace

void sgd_step(const std::vector<DenseMatrix*>& params, const std::vector<const DenseMatrix*>& grads,
              OptimizerState& state, const SgdOptions& opts) {
    prepare(params, grads, state, false);
    ++state.step;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params[k]->values();
        auto g = grads[k]->values();
        auto buf = state.m[k].values();
        for (std::size_t e = 0; e < p.size(); ++e) {
            buf[e] = opts.momentum * buf[e] + g[e];
            p[e] -= opts.lr * buf[e];
        }
    }
}

void adam_step(const std::vector<DenseMatrix*>& params, const std::vector<const DenseMatrix*>& grads,
               OptimizerState& state, const AdamOptions& opts) {
    prepare(params, grads, state, true);
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(opts.beta1, t);
    const double c2 = 1.0 - std::pow(opts.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params[k]->values();
        auto g = grads[k]->values();
        auto m = state.m[k].values();
        auto v = state.v[k].values();
        for (std::size_t e = 0; e < p.size(); ++e) {
            m[e] = opts.beta1 * m[e] + (1.0 - opts.beta1) * g[e];
            v[e] = opts.beta2 * v[e] + (1.0 - opts.beta2) * g[e] * g[e];
            p[e] -= opts.lr * (m[e] / c1) / (std::sqrt(v[e] / c2) + opts.eps);
        }
    }
}

}  // namespace ignn
