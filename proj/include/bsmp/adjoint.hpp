#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bsmp/simulate.hpp"

namespace bsmp {

/// Per-path adjoint samples. Y and Z are single-path unbiased surrogates of
/// the classical conditional-expectation scheme: their batch means estimate
/// the classical solution, individual paths are deliberately noisy
/// (E[|Z_n|^2] grows like N).
struct AdjointBatch {
    TimeGrid grid;
    int paths = 0;
    std::vector<double> y;  // row-major [paths][steps+1]
    std::vector<double> z;  // row-major [paths][steps]

    double Y(int i, int n) const { return y[static_cast<std::size_t>(i) * (grid.steps + 1) + n]; }
    double Z(int i, int n) const { return z[static_cast<std::size_t>(i) * grid.steps + n]; }
};

/// Backward sweep on the same increments as the forward pass:
///   Y_N = terminal_grad(X_N)
///   Z_n = Y_{n+1} dW_n / dt
///   Y_n = Y_{n+1} + dt (drift_x Y_{n+1} + diffusion_x Z_n + cost_x)   at (t_n, X_n, u_n).
/// The diffusion_x term vanishes identically for state-independent diffusion.
inline AdjointBatch backward_sample(const ProblemSpec& p, const BatchTrajectory& traj) {
    if (traj.noise == nullptr || traj.control == nullptr)
        throw std::invalid_argument("backward_sample: trajectory lost its noise or control");
    detail::require(bool(p.terminal_grad), "terminal_grad");
    detail::require(bool(p.drift_x), "drift_x");
    detail::require(bool(p.diffusion_x), "diffusion_x");
    detail::require(bool(p.cost_x), "cost_x");

    const NoiseBatch& noise = *traj.noise;
    const ControlPath& u = *traj.control;
    const int N = traj.grid.steps;
    const int M = traj.paths;
    const double dt = traj.grid.dt();

    AdjointBatch out;
    out.grid = traj.grid;
    out.paths = M;
    out.y.resize(static_cast<std::size_t>(M) * (N + 1));
    out.z.resize(static_cast<std::size_t>(M) * N);

    for (int i = 0; i < M; ++i) {
        const std::size_t yrow = static_cast<std::size_t>(i) * (N + 1);
        const std::size_t zrow = static_cast<std::size_t>(i) * N;
        double ynext = p.terminal_grad(traj.state(i, N));
        out.y[yrow + N] = ynext;
        for (int n = N - 1; n >= 0; --n) {
            const double t = traj.grid.time(n);
            const double x = traj.state(i, n);
            const double zn = ynext * noise.dW(i, n) / dt;
            out.z[zrow + n] = zn;
            ynext = ynext + dt * (p.drift_x(t, x, u[n]) * ynext +
                                  p.diffusion_x(t, x, u[n]) * zn + p.cost_x(t, x, u[n]));
            out.y[yrow + n] = ynext;
        }
    }
    return out;
}

/// Batch-mean Hamiltonian gradient in u, one value per grid cell, pairing
/// (X_n, Y_n, Z_n) with t_n. std_error[n] is the Monte-Carlo standard error
/// of values[n].
struct GradientEstimate {
    std::vector<double> values;
    std::vector<double> std_error;
    int paths = 0;
};

namespace detail {
inline void check_adjoint_match(const BatchTrajectory& traj, const AdjointBatch& adj) {
    if (adj.paths != traj.paths || !(adj.grid == traj.grid))
        throw std::invalid_argument("adjoint batch does not match trajectory batch");
}
}  // namespace detail

inline GradientEstimate batch_gradient(const ProblemSpec& p, const ControlPath& u,
                                       const BatchTrajectory& traj, const AdjointBatch& adj) {
    detail::require(bool(p.drift_u), "drift_u");
    detail::require(bool(p.diffusion_u), "diffusion_u");
    detail::require(bool(p.cost_u), "cost_u");
    detail::check_adjoint_match(traj, adj);
    if (!(u.grid() == traj.grid))
        throw std::invalid_argument("batch_gradient: control grid mismatch");

    const int N = traj.grid.steps;
    const int M = traj.paths;
    GradientEstimate out;
    out.paths = M;
    out.values.assign(N, 0.0);
    out.std_error.assign(N, 0.0);

    for (int n = 0; n < N; ++n) {
        const double t = traj.grid.time(n);
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < M; ++i) {
            const double x = traj.state(i, n);
            const double g = p.drift_u(t, x, u[n]) * adj.Y(i, n) +
                             p.diffusion_u(t, x, u[n]) * adj.Z(i, n) +
                             p.cost_u(t, x, u[n]);
            sum += g;
            sumsq += g * g;
        }
        const double mean = sum / M;
        out.values[n] = mean;
        const double var = std::max(0.0, sumsq / M - mean * mean);
        out.std_error[n] = M > 1 ? std::sqrt(var / (M - 1)) : std::sqrt(var);
    }
    return out;
}

/// Batch mean of the pointwise Hamiltonian minimizer, the update candidate of
/// the damped fixed-point iteration.
inline ControlPath batch_hbar(const ProblemSpec& p, const BatchTrajectory& traj,
                              const AdjointBatch& adj) {
    detail::require(bool(p.hamiltonian_minimizer), "hamiltonian_minimizer");
    detail::check_adjoint_match(traj, adj);

    const int N = traj.grid.steps;
    const int M = traj.paths;
    std::vector<double> vals(static_cast<std::size_t>(N), 0.0);
    for (int n = 0; n < N; ++n) {
        const double t = traj.grid.time(n);
        double sum = 0.0;
        for (int i = 0; i < M; ++i)
            sum += p.hamiltonian_minimizer(t, traj.state(i, n), adj.Y(i, n), adj.Z(i, n));
        vals[n] = sum / M;
    }
    return ControlPath(traj.grid, std::move(vals));
}

/// mean_i Z_n^2 per cell; scales like N/T on trivial specs, which is the
/// variance blow-up batching is there to average away.
inline std::vector<double> z_second_moment(const AdjointBatch& adj) {
    const int N = adj.grid.steps;
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int n = 0; n < N; ++n) {
        double s = 0.0;
        for (int i = 0; i < adj.paths; ++i) s += adj.Z(i, n) * adj.Z(i, n);
        out[n] = s / adj.paths;
    }
    return out;
}

}  // namespace bsmp
