#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bsmp/noise.hpp"
#include "bsmp/problem.hpp"
#include "bsmp/simulate.hpp"

namespace {

using namespace bsmp;

ProblemSpec affine_spec(double x0, double slope, double intercept, double diff_const) {
    ProblemSpec p;
    p.x0 = x0;
    p.drift = [slope, intercept](double, double x, double) { return slope * x + intercept; };
    p.diffusion = [diff_const](double, double, double) { return diff_const; };
    p.running_cost = [](double, double, double) { return 0.0; };
    p.terminal_cost = [](double) { return 0.0; };
    p.drift_x = [slope](double, double, double) { return slope; };
    p.drift_u = [](double, double, double) { return 0.0; };
    p.diffusion_x = [](double, double, double) { return 0.0; };
    p.diffusion_u = [](double, double, double) { return 0.0; };
    p.cost_x = [](double, double, double) { return 0.0; };
    p.cost_u = [](double, double, double) { return 0.0; };
    p.terminal_grad = [](double) { return 0.0; };
    p.drift_xx = [](double, double, double) { return 0.0; };
    p.diffusion_xx = [](double, double, double) { return 0.0; };
    return p;
}

ProblemSpec gbm_spec(double x0, double mu, double sigma) {
    ProblemSpec p;
    p.x0 = x0;
    p.drift = [mu](double, double x, double) { return mu * x; };
    p.diffusion = [sigma](double, double x, double) { return sigma * x; };
    p.running_cost = [](double, double, double) { return 0.0; };
    p.terminal_cost = [](double) { return 0.0; };
    p.drift_x = [mu](double, double, double) { return mu; };
    p.drift_u = [](double, double, double) { return 0.0; };
    p.diffusion_x = [sigma](double, double, double) { return sigma; };
    p.diffusion_u = [](double, double, double) { return 0.0; };
    p.cost_x = [](double, double, double) { return 0.0; };
    p.cost_u = [](double, double, double) { return 0.0; };
    p.terminal_grad = [](double) { return 0.0; };
    p.drift_xx = [](double, double, double) { return 0.0; };
    p.diffusion_xx = [](double, double, double) { return 0.0; };
    return p;
}

TEST(Noise, DeterministicAndSeedSensitive) {
    TimeGrid g(1.0, 16);
    NoiseBatch a = sample_noise(g, 8, true, 42);
    NoiseBatch b = sample_noise(g, 8, true, 42);
    EXPECT_EQ(a.dw, b.dw);
    EXPECT_EQ(a.dq, b.dq);

    NoiseBatch c = sample_noise(g, 8, true, 43);
    EXPECT_NE(a.dw, c.dw);
}

TEST(Noise, PathStreamsStableUnderBatchGrowth) {
    TimeGrid g(1.0, 10);
    NoiseBatch small = sample_noise(g, 4, false, 7);
    NoiseBatch big = sample_noise(g, 16, false, 7);
    for (int i = 0; i < 4; ++i)
        for (int n = 0; n < g.steps; ++n) EXPECT_EQ(small.dW(i, n), big.dW(i, n));
}

TEST(Noise, IncrementMomentsMatchBrownianLaw) {
    TimeGrid g(2.0, 8);
    const int M = 200000;
    NoiseBatch nb = sample_noise(g, M, false, 5);

    // Sum over steps has variance T; per-step mean is 0 within a CLT band.
    double mean_sum = 0.0, var_sum = 0.0;
    for (int i = 0; i < M; ++i) {
        double s = 0.0;
        for (int n = 0; n < g.steps; ++n) s += nb.dW(i, n);
        mean_sum += s;
        var_sum += s * s;
    }
    mean_sum /= M;
    var_sum = var_sum / M - mean_sum * mean_sum;
    EXPECT_NEAR(mean_sum, 0.0, 4.0 * std::sqrt(g.horizon / M));
    EXPECT_NEAR(var_sum, g.horizon, 0.05);
}

TEST(Noise, DoubleIntegralJointMoments) {
    TimeGrid g(1.0, 4);
    const double dt = g.dt();
    const int M = 400000;
    NoiseBatch nb = sample_noise(g, M, true, 11);

    double qq = 0.0, qw = 0.0;
    for (int i = 0; i < M; ++i) {
        qq += nb.dQ(i, 0) * nb.dQ(i, 0);
        qw += nb.dQ(i, 0) * nb.dW(i, 0);
    }
    qq /= M;
    qw /= M;
    EXPECT_NEAR(qq, dt * dt * dt / 3.0, 0.03 * dt * dt * dt);
    EXPECT_NEAR(qw, dt * dt / 2.0, 0.03 * dt * dt);
}

TEST(Euler, DeterministicLinearDriftIsExactCompounding) {
    // drift = x, diffusion = 0, dt = 1/4: X_N = (1 + dt)^N with every product
    // exact in binary, so plain equality holds.
    ProblemSpec p = affine_spec(1.0, 1.0, 0.0, 0.0);
    TimeGrid g(1.0, 4);
    ControlPath u = ControlPath::zeros(g);
    NoiseBatch nb = sample_noise(g, 3, false, 1);
    BatchTrajectory traj = simulate_euler(p, u, nb);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(traj.state(i, 0), 1.0);
        EXPECT_EQ(traj.state(i, 4), 2.44140625);
    }
}

TEST(Euler, FrozenCoefficientsGiveConstantPath) {
    ProblemSpec p = affine_spec(0.7, 0.0, 0.0, 0.0);
    TimeGrid g(1.0, 12);
    ControlPath u = ControlPath::zeros(g);
    NoiseBatch nb = sample_noise(g, 2, false, 3);
    BatchTrajectory traj = simulate_euler(p, u, nb);
    for (int n = 0; n <= g.steps; ++n) EXPECT_EQ(traj.state(0, n), 0.7);
}

TEST(Euler, UnitDiffusionAccumulatesIncrementsExactly) {
    ProblemSpec p = affine_spec(0.0, 0.0, 0.0, 1.0);
    TimeGrid g(1.0, 20);
    ControlPath u = ControlPath::zeros(g);
    NoiseBatch nb = sample_noise(g, 5, false, 9);
    BatchTrajectory traj = simulate_euler(p, u, nb);
    for (int i = 0; i < 5; ++i) {
        double x = 0.0;
        for (int n = 0; n < g.steps; ++n) {
            x = x + nb.dW(i, n);
            EXPECT_EQ(traj.state(i, n + 1), x);
        }
    }
}

TEST(Order2, CollapsesToEulerWhenStateDerivativesVanish) {
    // All x-derivatives zero: every correction term is exactly 0.0 and the
    // states agree bit for bit on shared noise.
    ProblemSpec p = affine_spec(1.0, 0.0, 0.3, 0.8);
    p.drift = [](double, double, double) { return 0.3; };
    TimeGrid g(1.0, 16);
    ControlPath u = ControlPath::zeros(g);
    NoiseBatch nb = sample_noise(g, 6, true, 17);
    BatchTrajectory a = simulate_euler(p, u, nb);
    BatchTrajectory b = simulate_order2(p, u, nb);
    EXPECT_EQ(a.states, b.states);
}

TEST(Order2, DeterministicQuadraticTaylorConvergesAtSecondOrder) {
    // drift = x, diffusion = 0: one step multiplies by 1 + h + h^2/2, so the
    // terminal error against e^T shrinks like h^2 (ratio 4 per halving).
    ProblemSpec p = affine_spec(1.0, 1.0, 0.0, 0.0);
    auto terminal = [&](int N) {
        TimeGrid g(1.0, N);
        ControlPath u = ControlPath::zeros(g);
        NoiseBatch nb = sample_noise(g, 1, true, 1);
        return simulate_order2(p, u, nb).state(0, N);
    };
    const double e1 = std::abs(terminal(8) - std::exp(1.0));
    const double e2 = std::abs(terminal(16) - std::exp(1.0));
    EXPECT_GT(e1, 0.0);
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Order2, BeatsEulerWeaklyOnMultiplicativeNoise) {
    // Control-variate estimate of the weak terminal-mean error: subtract the
    // exact lognormal terminal state built from the same increments.
    const double mu = 1.0, sigma = 0.5, x0 = 1.0;
    ProblemSpec p = gbm_spec(x0, mu, sigma);
    TimeGrid g(1.0, 4);
    ControlPath u = ControlPath::zeros(g);
    const int M = 50000;
    NoiseBatch nb = sample_noise(g, M, true, 23);
    BatchTrajectory euler = simulate_euler(p, u, nb);
    BatchTrajectory taylor = simulate_order2(p, u, nb);

    double bias_euler = 0.0, bias_taylor = 0.0;
    for (int i = 0; i < M; ++i) {
        double wsum = 0.0;
        for (int n = 0; n < g.steps; ++n) wsum += nb.dW(i, n);
        const double exact = x0 * std::exp((mu - 0.5 * sigma * sigma) * g.horizon + sigma * wsum);
        bias_euler += euler.state(i, g.steps) - exact;
        bias_taylor += taylor.state(i, g.steps) - exact;
    }
    bias_euler = std::abs(bias_euler / M);
    bias_taylor = std::abs(bias_taylor / M);
    EXPECT_LT(bias_taylor, 0.5 * bias_euler);
}

TEST(Order2, RequiresSecondDerivativesAndDq) {
    ProblemSpec p = gbm_spec(1.0, 0.5, 0.3);
    TimeGrid g(1.0, 4);
    ControlPath u = ControlPath::zeros(g);
    NoiseBatch plain = sample_noise(g, 2, false, 2);
    EXPECT_THROW(simulate_order2(p, u, plain), std::invalid_argument);

    ProblemSpec incomplete = p;
    incomplete.drift_xx = nullptr;
    NoiseBatch full = sample_noise(g, 2, true, 2);
    EXPECT_THROW(simulate_order2(incomplete, u, full), std::invalid_argument);
}

TEST(Forward, StateFlowIsStableInControlPerturbations) {
    // Multiplicative-noise dynamics drift = x*u, diffusion = sigma*x: nearby
    // controls produce uniformly nearby state batches.
    ProblemSpec p;
    p.x0 = 1.0;
    const double sigma = 0.5;
    p.drift = [](double, double x, double u) { return x * u; };
    p.diffusion = [sigma](double, double x, double) { return sigma * x; };
    p.running_cost = [](double, double, double) { return 0.0; };
    p.terminal_cost = [](double) { return 0.0; };
    p.drift_x = [](double, double, double u) { return u; };
    p.drift_u = [](double, double x, double) { return x; };
    p.diffusion_x = [sigma](double, double, double) { return sigma; };
    p.diffusion_u = [](double, double, double) { return 0.0; };
    p.cost_x = [](double, double, double) { return 0.0; };
    p.cost_u = [](double, double, double) { return 0.0; };
    p.terminal_grad = [](double) { return 0.0; };

    TimeGrid g(1.0, 40);
    const double delta = 0.01;
    ControlPath u = ControlPath::sample(g, [](double t) { return 1.0 - t; });
    ControlPath v = u;
    for (int n = 0; n < g.steps; ++n) v[n] = u[n] + delta;

    const int M = 2000;
    NoiseBatch nb = sample_noise(g, M, false, 31);
    BatchTrajectory a = simulate_euler(p, u, nb);
    BatchTrajectory b = simulate_euler(p, v, nb);

    double worst = 0.0;
    for (int n = 0; n <= g.steps; ++n) {
        double mean_abs = 0.0;
        for (int i = 0; i < M; ++i) mean_abs += std::abs(a.state(i, n) - b.state(i, n));
        worst = std::max(worst, mean_abs / M);
    }
    EXPECT_GT(worst, 0.0);
    EXPECT_LT(worst, 10.0 * delta);
}

TEST(Forward, RejectsMismatchedGrids) {
    ProblemSpec p = affine_spec(1.0, 0.0, 0.0, 1.0);
    ControlPath u = ControlPath::zeros(TimeGrid(1.0, 8));
    NoiseBatch nb = sample_noise(TimeGrid(1.0, 4), 2, false, 1);
    EXPECT_THROW(simulate_euler(p, u, nb), std::invalid_argument);
}

}  // namespace
