#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bsmp/adjoint.hpp"

namespace bsmp {

/// Step-size schedule: either constant or the diminishing rule
/// eta_k = theta / (k + offset) with k counted from 1.
class LearningRate {
  public:
    static LearningRate constant(double eta) {
        if (!(eta > 0.0)) throw std::invalid_argument("LearningRate: eta must be positive");
        LearningRate lr;
        lr.eta_ = eta;
        return lr;
    }
    static LearningRate diminishing(double theta, double offset) {
        if (!(theta > 0.0)) throw std::invalid_argument("LearningRate: theta must be positive");
        if (offset < 0.0) throw std::invalid_argument("LearningRate: offset must be >= 0");
        LearningRate lr;
        lr.theta_ = theta;
        lr.offset_ = offset;
        lr.diminishing_ = true;
        return lr;
    }

    /// k is zero-based iteration index.
    double at(long k) const {
        return diminishing_ ? theta_ / (static_cast<double>(k) + 1.0 + offset_) : eta_;
    }
    bool is_diminishing() const { return diminishing_; }

  private:
    bool diminishing_ = false;
    double eta_ = 0.0;
    double theta_ = 0.0;
    double offset_ = 0.0;
};

struct ProjectionConfig {
    long iterations = 1;        // K; 0 is allowed and returns the start control
    int batch_size = 1;         // M
    LearningRate lr = LearningRate::constant(0.1);
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::euler;
    std::optional<double> clamp;  // optional |u_n| box bound, off by default
};

struct ContractionConfig {
    long iterations = 1;
    int batch_size = 1;
    double damping = 0.995;  // rho; the mean update is (1-rho) candidate + rho current
    std::uint64_t seed = 1;
};

struct IterationRecord {
    long k = 0;                 // 1-based
    double grad_norm = 0.0;     // projection: ||grad||; contraction: ||u_{k+1} - u_k||
    std::optional<double> relative_error;
    double wall_time_s = 0.0;   // cumulative
};

struct SolveResult {
    ControlPath control;
    std::vector<IterationRecord> history;
};

/// Thrown when an iterate blows up; carries what was computed so far so the
/// caller can keep partial output.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(std::string what, SolveResult partial)
        : std::runtime_error(std::move(what)), partial_(std::move(partial)) {}
    const SolveResult& partial() const { return partial_; }

  private:
    SolveResult partial_;
};

namespace detail {

inline constexpr double kDivergenceNorm = 1e6;

inline bool finite_path(const ControlPath& u) {
    for (int n = 0; n < u.size(); ++n)
        if (!std::isfinite(u[n])) return false;
    return true;
}

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline void check_iterate(const ControlPath& u, std::vector<IterationRecord>& history,
                          const char* method) {
    if (!finite_path(u) || l2_norm(u) > kDivergenceNorm) {
        SolveResult partial{u, std::move(history)};
        throw DivergenceError(std::string(method) + ": control iterate diverged",
                              std::move(partial));
    }
}

}  // namespace detail

/// Batched stochastic gradient projection. Every iteration draws a fresh
/// batch, runs the forward scheme and the per-sample backward pass, and steps
/// against the batch-mean Hamiltonian gradient. Noise streams derive from
/// (seed, iteration, path), so results are reproducible and independent of
/// batching internals.
inline SolveResult run_projection(const ProblemSpec& p, TimeGrid grid,
                                  const ProjectionConfig& cfg, const ControlPath& start,
                                  const ControlPath* reference = nullptr) {
    check_first_order(p);
    if (cfg.scheme == Scheme::order2) check_order2(p);
    if (cfg.iterations < 0) throw std::invalid_argument("run_projection: negative iterations");
    if (cfg.batch_size < 1) throw std::invalid_argument("run_projection: batch_size must be >= 1");
    if (!(start.grid() == grid)) throw std::invalid_argument("run_projection: grid mismatch");

    detail::StopWatch clock;
    SolveResult res{start, {}};
    res.history.reserve(static_cast<std::size_t>(cfg.iterations));
    const bool with_dq = cfg.scheme == Scheme::order2;

    for (long k = 0; k < cfg.iterations; ++k) {
        const NoiseBatch noise = sample_noise(grid, cfg.batch_size, with_dq,
                                              detail::substream(cfg.seed, static_cast<std::uint64_t>(k)));
        const BatchTrajectory traj = simulate(p, res.control, noise, cfg.scheme);
        const AdjointBatch adj = backward_sample(p, traj);
        const GradientEstimate grad = batch_gradient(p, res.control, traj, adj);

        const double eta = cfg.lr.at(k);
        double norm_sq = 0.0;
        for (int n = 0; n < grid.steps; ++n) {
            norm_sq += grad.values[n] * grad.values[n];
            double v = res.control[n] - eta * grad.values[n];
            if (cfg.clamp) v = std::clamp(v, -*cfg.clamp, *cfg.clamp);
            res.control[n] = v;
        }

        IterationRecord rec;
        rec.k = k + 1;
        rec.grad_norm = std::sqrt(grid.dt() * norm_sq);
        if (reference) rec.relative_error = relative_error(res.control, *reference);
        rec.wall_time_s = clock.seconds();
        res.history.push_back(rec);

        detail::check_iterate(res.control, res.history, "run_projection");
    }
    return res;
}

/// Damped fixed-point iteration on the batch-mean Hamiltonian minimizer:
///   u_{k+1} = (1 - rho) * mean_i hbar(t_n, X_n^i, Y_n^i, Z_n^i) + rho * u_k.
/// Forward simulation is always Euler.
inline SolveResult run_contraction(const ProblemSpec& p, TimeGrid grid,
                                   const ContractionConfig& cfg, const ControlPath& start,
                                   const ControlPath* reference = nullptr) {
    check_first_order(p);
    detail::require(bool(p.hamiltonian_minimizer), "hamiltonian_minimizer");
    if (cfg.iterations < 0) throw std::invalid_argument("run_contraction: negative iterations");
    if (cfg.batch_size < 1)
        throw std::invalid_argument("run_contraction: batch_size must be >= 1");
    if (!(cfg.damping >= 0.0 && cfg.damping < 1.0))
        throw std::invalid_argument("run_contraction: damping must lie in [0, 1)");
    if (!(start.grid() == grid)) throw std::invalid_argument("run_contraction: grid mismatch");

    detail::StopWatch clock;
    SolveResult res{start, {}};
    res.history.reserve(static_cast<std::size_t>(cfg.iterations));

    for (long k = 0; k < cfg.iterations; ++k) {
        const NoiseBatch noise = sample_noise(grid, cfg.batch_size, false,
                                              detail::substream(cfg.seed, static_cast<std::uint64_t>(k)));
        const BatchTrajectory traj = simulate_euler(p, res.control, noise);
        const AdjointBatch adj = backward_sample(p, traj);
        const ControlPath cand = batch_hbar(p, traj, adj);

        double step_sq = 0.0;
        for (int n = 0; n < grid.steps; ++n) {
            const double next = (1.0 - cfg.damping) * cand[n] + cfg.damping * res.control[n];
            const double d = next - res.control[n];
            step_sq += d * d;
            res.control[n] = next;
        }

        IterationRecord rec;
        rec.k = k + 1;
        rec.grad_norm = std::sqrt(grid.dt() * step_sq);
        if (reference) rec.relative_error = relative_error(res.control, *reference);
        rec.wall_time_s = clock.seconds();
        res.history.push_back(rec);

        detail::check_iterate(res.control, res.history, "run_contraction");
    }
    return res;
}

}  // namespace bsmp
