#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace bsmp {

/// Scalar controlled diffusion
///   dX = drift(t, X, u) dt + diffusion(t, X, u) dW,  X(0) = x0
/// with cost  E[ int_0^T running_cost(t, X, u) dt + terminal_cost(X_T) ].
///
/// One ProblemSpec describes a single scalar coordinate; multi-dimensional
/// benchmark problems with decoupled dynamics are lists of these. The adjoint
/// machinery assumes the control enters the diffusion only through
/// diffusion_u and the state through diffusion_x.
///
/// Derivative fields are with respect to the named argument at fixed others.
/// drift_xx / diffusion_xx are needed only by the second-order weak scheme.
struct ProblemSpec {
    using Coeff = std::function<double(double t, double x, double u)>;
    using Terminal = std::function<double(double x)>;

    double x0 = 0.0;

    Coeff drift;
    Coeff diffusion;
    Coeff running_cost;
    Terminal terminal_cost;

    Coeff drift_x;
    Coeff drift_u;
    Coeff diffusion_x;
    Coeff diffusion_u;
    Coeff cost_x;
    Coeff cost_u;
    Terminal terminal_grad;

    Coeff drift_xx;      // optional unless the order-2 scheme is used
    Coeff diffusion_xx;  // optional unless the order-2 scheme is used

    /// Optional pointwise minimizer of the Hamiltonian in u, e.g. -B*y - D*z
    /// for linear-quadratic problems. Required by the damped fixed-point solver.
    std::function<double(double t, double x, double y, double z)> hamiltonian_minimizer;

    /// Optional closed-form references used for error reporting.
    std::function<double(double t)> exact_control;
    std::function<double(double t)> exact_state_mean;
};

namespace detail {
inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ProblemSpec: missing ") + what);
}
}  // namespace detail

/// Fields needed by the forward Euler scheme and the backward pass.
inline void check_first_order(const ProblemSpec& p) {
    detail::require(bool(p.drift), "drift");
    detail::require(bool(p.diffusion), "diffusion");
    detail::require(bool(p.drift_x), "drift_x");
    detail::require(bool(p.drift_u), "drift_u");
    detail::require(bool(p.diffusion_x), "diffusion_x");
    detail::require(bool(p.diffusion_u), "diffusion_u");
    detail::require(bool(p.cost_x), "cost_x");
    detail::require(bool(p.cost_u), "cost_u");
    detail::require(bool(p.terminal_grad), "terminal_grad");
}

inline void check_order2(const ProblemSpec& p) {
    detail::require(bool(p.drift_xx), "drift_xx (order-2 scheme)");
    detail::require(bool(p.diffusion_xx), "diffusion_xx (order-2 scheme)");
}

/// H(t, x, y, z, u) = drift*y + diffusion*z + running_cost.
inline double hamiltonian(const ProblemSpec& p, double t, double x, double y, double z,
                          double u) {
    detail::require(bool(p.drift), "drift");
    detail::require(bool(p.diffusion), "diffusion");
    detail::require(bool(p.running_cost), "running_cost");
    return p.drift(t, x, u) * y + p.diffusion(t, x, u) * z + p.running_cost(t, x, u);
}

/// dH/du = drift_u*y + diffusion_u*z + cost_u.
inline double hamiltonian_grad_u(const ProblemSpec& p, double t, double x, double y,
                                 double z, double u) {
    detail::require(bool(p.drift_u), "drift_u");
    detail::require(bool(p.diffusion_u), "diffusion_u");
    detail::require(bool(p.cost_u), "cost_u");
    return p.drift_u(t, x, u) * y + p.diffusion_u(t, x, u) * z + p.cost_u(t, x, u);
}

}  // namespace bsmp
