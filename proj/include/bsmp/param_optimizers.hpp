#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bsmp {

/// First-order updates on flat parameter vectors, used to train the feedback
/// control network. State is explicit so runs can be checkpointed.

inline void check_sizes(std::span<const double> params, std::span<const double> grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("optimizer step: parameter/gradient size mismatch");
}

inline void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
    check_sizes(params, grads);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

struct AdagradState {
    std::vector<double> accum;  // running sum of squared gradients
};

inline void adagrad_step(std::span<double> params, std::span<const double> grads,
                         AdagradState& state, double lr, double eps = 1e-8) {
    check_sizes(params, grads);
    if (state.accum.empty()) state.accum.assign(params.size(), 0.0);
    if (state.accum.size() != params.size())
        throw std::invalid_argument("adagrad_step: state size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.accum[i] += grads[i] * grads[i];
        params[i] -= lr * grads[i] / std::sqrt(state.accum[i] + eps);
    }
}

struct AdamState {
    std::vector<double> m;  // first-moment estimate
    std::vector<double> v;  // second-moment estimate
    long step = 0;
};

/// Bias-corrected Adam with the usual defaults (0.9, 0.999, 1e-8). The first
/// step from a fresh state moves each coordinate by almost exactly lr.
inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamState& state, double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
    check_sizes(params, grads);
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw std::invalid_argument("adam_step: state size mismatch");
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace bsmp
