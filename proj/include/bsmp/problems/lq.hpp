#pragma once

#include <cmath>
#include <stdexcept>

#include "bsmp/classical_oracle.hpp"
#include "bsmp/problem.hpp"

namespace bsmp {

/// Configurable scalar linear-quadratic problem:
///   dX = (a X + b u + c) dt + (s0 + su u) dW,
///   cost = E[ int ( qx (X - xbar)^2 + r u^2 ) / 2 dt + gT X_T^2 / 2 ].
/// Requires r > 0 so the Hamiltonian has a unique minimizer in u.
struct LqProblem {
    double x0 = 1.0;
    double a = 0.0;    // drift slope in x
    double b = 1.0;    // drift slope in u
    double c = 0.0;    // drift offset
    double s0 = 1.0;   // additive noise level
    double su = 0.0;   // control-proportional noise level
    double qx = 1.0;   // running state weight
    double xbar = 0.0; // running state target
    double r = 1.0;    // running control weight
    double gT = 1.0;   // terminal weight

    ProblemSpec spec() const {
        if (r <= 0.0) throw std::invalid_argument("LqProblem: control weight r must be positive");
        ProblemSpec p;
        const LqProblem s = *this;
        p.x0 = x0;
        p.drift = [s](double, double x, double u) { return s.a * x + s.b * u + s.c; };
        p.diffusion = [s](double, double, double u) { return s.s0 + s.su * u; };
        p.running_cost = [s](double, double x, double u) {
            const double d = x - s.xbar;
            return 0.5 * s.qx * d * d + 0.5 * s.r * u * u;
        };
        p.terminal_cost = [s](double x) { return 0.5 * s.gT * x * x; };
        p.drift_x = [s](double, double, double) { return s.a; };
        p.drift_u = [s](double, double, double) { return s.b; };
        p.diffusion_x = [](double, double, double) { return 0.0; };
        p.diffusion_u = [s](double, double, double) { return s.su; };
        p.cost_x = [s](double, double x, double) { return s.qx * (x - s.xbar); };
        p.cost_u = [s](double, double, double u) { return s.r * u; };
        p.terminal_grad = [s](double x) { return s.gT * x; };
        p.drift_xx = [](double, double, double) { return 0.0; };
        p.diffusion_xx = [](double, double, double) { return 0.0; };
        p.hamiltonian_minimizer = [s](double, double, double y, double z) {
            return -(s.b * y + s.su * z) / s.r;
        };
        return p;
    }

    /// Linear-Gaussian view for the closed-form solver. Only meaningful when
    /// the control path entering the oracle is itself deterministic; the
    /// control dependence is folded into the intercepts by the caller.
    LinearGaussianModel frozen_model(ControlPath u, TimeGrid grid) const {
        if (!(u.grid() == grid)) throw std::invalid_argument("LqProblem: control grid mismatch");
        const LqProblem s = *this;
        LinearGaussianModel m;
        m.x0 = x0;
        m.drift_slope = a;
        m.drift_intercept = [s, u, grid](double t) {
            const int n = std::min<int>(grid.steps - 1, static_cast<int>(t / grid.dt()));
            return s.b * u[n] + s.c;
        };
        m.diffusion = s0;  // su u ignored; valid when su = 0
        m.cost_x_slope = qx;
        m.cost_x_intercept = [s](double) { return -s.qx * s.xbar; };
        m.terminal_slope = gT;
        m.terminal_intercept = 0.0;
        return m;
    }
};

}  // namespace bsmp
