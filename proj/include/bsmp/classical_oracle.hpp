#pragma once

#include <functional>
#include <vector>

#include "bsmp/grid.hpp"
#include "bsmp/problem.hpp"

namespace bsmp {

/// Linear-Gaussian test model under a fixed deterministic control:
///   drift(t, x)      = drift_slope * x + drift_intercept(t)
///   diffusion        = const
///   cost_x(t, x)     = cost_x_slope * x + cost_x_intercept(t)
///   terminal_grad(x) = terminal_slope * x + terminal_intercept.
/// Linearity is part of the type, so the closed-form conditional expectations
/// below are exact by construction.
struct LinearGaussianModel {
    double x0 = 0.0;
    double drift_slope = 0.0;
    std::function<double(double)> drift_intercept = [](double) { return 0.0; };
    double diffusion = 1.0;
    double cost_x_slope = 0.0;
    std::function<double(double)> cost_x_intercept = [](double) { return 0.0; };
    double terminal_slope = 0.0;
    double terminal_intercept = 0.0;
};

/// Unconditional means of the classical backward scheme, the reference the
/// sample-wise batch means must reproduce (unbiasedness).
struct ClassicalSolution {
    std::vector<double> state_mean;  // length steps+1
    std::vector<double> y_mean;      // length steps+1
    std::vector<double> z_mean;      // length steps
};

/// The classical scheme applied to the affine ansatz Y_n(x) = A_n x + B_n:
///   A_N = terminal_slope, B_N = terminal_intercept,
///   A_n = (1 + a dt)^2 A_{n+1} + dt p,
///   B_n = (1 + a dt)(A_{n+1} c_n dt + B_{n+1}) + dt q_n,
///   E[Z_n] = A_{n+1} * diffusion,
/// with state means following the Euler mean recursion.
inline ClassicalSolution classical_oracle(const LinearGaussianModel& m, TimeGrid grid) {
    const int N = grid.steps;
    const double dt = grid.dt();

    ClassicalSolution out;
    out.state_mean.resize(N + 1);
    out.y_mean.resize(N + 1);
    out.z_mean.resize(N);

    out.state_mean[0] = m.x0;
    for (int n = 0; n < N; ++n) {
        const double t = grid.time(n);
        out.state_mean[n + 1] =
            out.state_mean[n] + dt * (m.drift_slope * out.state_mean[n] + m.drift_intercept(t));
    }

    std::vector<double> A(N + 1), B(N + 1);
    A[N] = m.terminal_slope;
    B[N] = m.terminal_intercept;
    const double growth = 1.0 + m.drift_slope * dt;
    for (int n = N - 1; n >= 0; --n) {
        const double t = grid.time(n);
        A[n] = growth * growth * A[n + 1] + dt * m.cost_x_slope;
        B[n] = growth * (A[n + 1] * m.drift_intercept(t) * dt + B[n + 1]) +
               dt * m.cost_x_intercept(t);
    }

    for (int n = 0; n <= N; ++n) out.y_mean[n] = A[n] * out.state_mean[n] + B[n];
    for (int n = 0; n < N; ++n) out.z_mean[n] = A[n + 1] * m.diffusion;
    return out;
}

/// Matching simulation spec (control-independent coefficients; the control
/// dependence is already folded into drift_intercept).
inline ProblemSpec to_problem_spec(const LinearGaussianModel& m) {
    ProblemSpec p;
    p.x0 = m.x0;
    p.drift = [m](double t, double x, double) { return m.drift_slope * x + m.drift_intercept(t); };
    p.diffusion = [m](double, double, double) { return m.diffusion; };
    p.running_cost = [](double, double, double) { return 0.0; };
    p.terminal_cost = [m](double x) {
        return 0.5 * m.terminal_slope * x * x + m.terminal_intercept * x;
    };
    p.drift_x = [m](double, double, double) { return m.drift_slope; };
    p.drift_u = [](double, double, double) { return 0.0; };
    p.diffusion_x = [](double, double, double) { return 0.0; };
    p.diffusion_u = [](double, double, double) { return 0.0; };
    p.cost_x = [m](double t, double x, double) {
        return m.cost_x_slope * x + m.cost_x_intercept(t);
    };
    p.cost_u = [](double, double, double) { return 0.0; };
    p.terminal_grad = [m](double x) { return m.terminal_slope * x + m.terminal_intercept; };
    p.drift_xx = [](double, double, double) { return 0.0; };
    p.diffusion_xx = [](double, double, double) { return 0.0; };
    return p;
}

}  // namespace bsmp
