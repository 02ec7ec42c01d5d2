#pragma once

#include <stdexcept>
#include <vector>

#include "bsmp/grid.hpp"
#include "bsmp/noise.hpp"
#include "bsmp/problem.hpp"

namespace bsmp {

enum class Scheme { euler, order2 };

/// Forward paths of one batch. Holds non-owning views of the noise and the
/// control it was produced from (both must outlive the trajectory); the
/// backward pass reuses exactly the same increments.
struct BatchTrajectory {
    TimeGrid grid;
    int paths = 0;
    Scheme scheme = Scheme::euler;
    std::vector<double> states;  // row-major [paths][steps+1]
    const NoiseBatch* noise = nullptr;
    const ControlPath* control = nullptr;

    double state(int i, int n) const {
        return states[static_cast<std::size_t>(i) * (grid.steps + 1) + n];
    }
};

namespace detail {
inline void check_batch_inputs(const ControlPath& u, const NoiseBatch& noise) {
    if (!(u.grid() == noise.grid))
        throw std::invalid_argument("simulate: control and noise grids differ");
    if (noise.paths < 1) throw std::invalid_argument("simulate: empty noise batch");
}
}  // namespace detail

/// Euler-Maruyama: X_{n+1} = X_n + drift*dt + diffusion*dW_n.
inline BatchTrajectory simulate_euler(const ProblemSpec& p, const ControlPath& u,
                                      const NoiseBatch& noise) {
    detail::require(bool(p.drift), "drift");
    detail::require(bool(p.diffusion), "diffusion");
    detail::check_batch_inputs(u, noise);

    const int N = noise.grid.steps;
    const int M = noise.paths;
    const double dt = noise.grid.dt();

    BatchTrajectory out;
    out.grid = noise.grid;
    out.paths = M;
    out.scheme = Scheme::euler;
    out.noise = &noise;
    out.control = &u;
    out.states.resize(static_cast<std::size_t>(M) * (N + 1));

    for (int i = 0; i < M; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * (N + 1);
        double x = p.x0;
        out.states[row] = x;
        for (int n = 0; n < N; ++n) {
            const double t = noise.grid.time(n);
            const double w = noise.dW(i, n);
            x = x + (dt * p.drift(t, x, u[n]) + p.diffusion(t, x, u[n]) * w);
            out.states[row + n + 1] = x;
        }
    }
    return out;
}

/// Weak second-order Taylor step (scalar, derivatives in x at fixed (t, u)):
///   X + b dt + s dW
///     + 1/2 s s' (dW^2 - dt) + s b' dQ + 1/2 (b b' + 1/2 s^2 b'') dt^2
///     + (b s' + 1/2 s^2 s'') (dW dt - dQ) + 1/2 s (s s'' + (s')^2) (dW^2/3 - dt) dW.
/// With coefficients constant in x every correction vanishes exactly and the
/// result is bit-identical to simulate_euler on the same noise.
inline BatchTrajectory simulate_order2(const ProblemSpec& p, const ControlPath& u,
                                       const NoiseBatch& noise) {
    detail::require(bool(p.drift), "drift");
    detail::require(bool(p.diffusion), "diffusion");
    detail::require(bool(p.drift_x), "drift_x");
    detail::require(bool(p.diffusion_x), "diffusion_x");
    check_order2(p);
    detail::check_batch_inputs(u, noise);
    if (!noise.has_dq())
        throw std::invalid_argument("simulate_order2: noise lacks dQ increments");

    const int N = noise.grid.steps;
    const int M = noise.paths;
    const double dt = noise.grid.dt();

    BatchTrajectory out;
    out.grid = noise.grid;
    out.paths = M;
    out.scheme = Scheme::order2;
    out.noise = &noise;
    out.control = &u;
    out.states.resize(static_cast<std::size_t>(M) * (N + 1));

    for (int i = 0; i < M; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * (N + 1);
        double x = p.x0;
        out.states[row] = x;
        for (int n = 0; n < N; ++n) {
            const double t = noise.grid.time(n);
            const double un = u[n];
            const double w = noise.dW(i, n);
            const double q = noise.dQ(i, n);
            const double b = p.drift(t, x, un);
            const double s = p.diffusion(t, x, un);
            const double bx = p.drift_x(t, x, un);
            const double bxx = p.drift_xx(t, x, un);
            const double sx = p.diffusion_x(t, x, un);
            const double sxx = p.diffusion_xx(t, x, un);

            double xn = x + (dt * b + s * w);
            xn = xn + 0.5 * s * sx * (w * w - dt);
            xn = xn + s * bx * q;
            xn = xn + 0.5 * (b * bx + 0.5 * s * s * bxx) * dt * dt;
            xn = xn + (b * sx + 0.5 * s * s * sxx) * (w * dt - q);
            xn = xn + 0.5 * s * (s * sxx + sx * sx) * (w * w / 3.0 - dt) * w;
            x = xn;
            out.states[row + n + 1] = x;
        }
    }
    return out;
}

inline BatchTrajectory simulate(const ProblemSpec& p, const ControlPath& u,
                                const NoiseBatch& noise, Scheme scheme) {
    return scheme == Scheme::euler ? simulate_euler(p, u, noise)
                                   : simulate_order2(p, u, noise);
}

}  // namespace bsmp
