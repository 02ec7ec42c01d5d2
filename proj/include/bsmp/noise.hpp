#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "bsmp/grid.hpp"

namespace bsmp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream seed for sub-entity `index` of a run seeded with `seed`. Streams
/// are independent of how many entities exist, so enlarging a batch never
/// perturbs earlier paths.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

}  // namespace detail

/// Brownian increments for a batch of paths, plus the correlated double
/// integrals dQ_n ~ int_{t_n}^{t_{n+1}} (W_s - W_{t_n}) ds needed by the
/// order-2 scheme. Joint law per step is exact:
///   E[dQ^2] = dt^3/3, E[dQ dW] = dt^2/2,
/// realized as dQ = (dt/2) dW + (dt^{3/2}/sqrt(12)) xi with xi independent.
struct NoiseBatch {
    TimeGrid grid;
    int paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> dw;  // row-major [paths][steps]
    std::vector<double> dq;  // empty unless sampled with increments

    bool has_dq() const { return !dq.empty(); }
    double dW(int i, int n) const { return dw[static_cast<std::size_t>(i) * grid.steps + n]; }
    double dQ(int i, int n) const { return dq[static_cast<std::size_t>(i) * grid.steps + n]; }
};

/// Deterministic given (seed, paths, grid): path i draws from its own stream
/// derived from (seed, i).
inline NoiseBatch sample_noise(TimeGrid grid, int paths, bool with_dq, std::uint64_t seed) {
    if (paths < 1) throw std::invalid_argument("sample_noise: need at least one path");
    NoiseBatch out;
    out.grid = grid;
    out.paths = paths;
    out.seed = seed;
    const int N = grid.steps;
    const double dt = grid.dt();
    const double sq_dt = std::sqrt(dt);
    const double q_w = dt / 2.0;
    const double q_x = dt * sq_dt / std::sqrt(12.0);
    out.dw.resize(static_cast<std::size_t>(paths) * N);
    if (with_dq) out.dq.resize(static_cast<std::size_t>(paths) * N);
    for (int i = 0; i < paths; ++i) {
        std::mt19937_64 rng(detail::substream(seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t base = static_cast<std::size_t>(i) * N;
        for (int n = 0; n < N; ++n) {
            const double w = sq_dt * gauss(rng);
            out.dw[base + n] = w;
            if (with_dq) out.dq[base + n] = q_w * w + q_x * gauss(rng);
        }
    }
    return out;
}

}  // namespace bsmp
