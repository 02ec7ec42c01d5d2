#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "bsmp/grid.hpp"
#include "bsmp/noise.hpp"

namespace bsmp::hjb {

/// Exponentially transformable control problem in R^d:
///   dX = 2 sqrt(lambda) u dt + sqrt(2) dW,  X(0) = 0,
///   cost = E[ int |u|^2 dt + g(X_T) ],
/// whose value at (0, 0) has the Monte-Carlo representation implemented by
/// reference_value(). Default g is the smooth benchmark log((1+|x|^2)/2).
struct HjbSpec {
    int dim = 10;
    double lambda = 1.0;
    double horizon = 1.0;
    std::function<double(const Eigen::VectorXd&)> terminal;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> terminal_grad;

    static HjbSpec standard(int dim, double lambda) {
        if (dim < 1) throw std::invalid_argument("HjbSpec: dim must be positive");
        if (!(lambda > 0.0)) throw std::invalid_argument("HjbSpec: lambda must be positive");
        HjbSpec s;
        s.dim = dim;
        s.lambda = lambda;
        s.terminal = [](const Eigen::VectorXd& x) {
            return std::log(0.5 * (1.0 + x.squaredNorm()));
        };
        s.terminal_grad = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(2.0 * x / (1.0 + x.squaredNorm()));
        };
        return s;
    }
};

/// One-hidden-layer feedback control with frozen random inner weights, one
/// trainable outer affine map per time step:
///   u_n(x) = A_n tanh(W_n x + c_n) + b_n,
/// A_n (dim x width) and b_n trainable, W_n and c_n fixed at initialization.
struct RandomizedNet {
    int dim = 0;
    int width = 0;
    int steps = 0;
    std::vector<Eigen::MatrixXd> A;         // dim x width, trainable
    std::vector<Eigen::VectorXd> b;         // dim, trainable
    std::vector<Eigen::MatrixXd> frozen_w;  // width x dim
    std::vector<Eigen::VectorXd> frozen_c;  // width

    /// Trainable layers start at zero; frozen weights are N(0, weight_scale^2).
    static RandomizedNet init(int dim, int width, int steps, double weight_scale,
                              std::uint64_t seed) {
        if (dim < 1 || width < 1 || steps < 1)
            throw std::invalid_argument("RandomizedNet: dim, width, steps must be positive");
        RandomizedNet net;
        net.dim = dim;
        net.width = width;
        net.steps = steps;
        net.A.assign(steps, Eigen::MatrixXd::Zero(dim, width));
        net.b.assign(steps, Eigen::VectorXd::Zero(dim));
        net.frozen_w.reserve(steps);
        net.frozen_c.reserve(steps);
        std::normal_distribution<double> normal(0.0, weight_scale);
        for (int n = 0; n < steps; ++n) {
            std::mt19937_64 gen(detail::substream(seed, static_cast<std::uint64_t>(n)));
            Eigen::MatrixXd w(width, dim);
            for (int r = 0; r < width; ++r)
                for (int c = 0; c < dim; ++c) w(r, c) = normal(gen);
            Eigen::VectorXd cvec(width);
            for (int r = 0; r < width; ++r) cvec(r) = normal(gen);
            net.frozen_w.push_back(std::move(w));
            net.frozen_c.push_back(std::move(cvec));
        }
        return net;
    }

    Eigen::VectorXd forward(int n, const Eigen::VectorXd& x) const {
        check_step(n);
        if (x.size() != dim) throw std::invalid_argument("RandomizedNet: state dimension mismatch");
        const Eigen::VectorXd h = (frozen_w[static_cast<std::size_t>(n)] * x +
                                   frozen_c[static_cast<std::size_t>(n)])
                                      .array()
                                      .tanh()
                                      .matrix();
        return A[static_cast<std::size_t>(n)] * h + b[static_cast<std::size_t>(n)];
    }

    /// Order-insensitive content hash of the frozen layers; training must not
    /// change it.
    std::uint64_t frozen_hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        auto mix = [&h](double v) {
            std::uint64_t bits;
            static_assert(sizeof bits == sizeof v);
            std::memcpy(&bits, &v, sizeof bits);
            h = detail::splitmix64(h ^ bits);
        };
        for (int n = 0; n < steps; ++n) {
            const auto& w = frozen_w[static_cast<std::size_t>(n)];
            for (int r = 0; r < w.rows(); ++r)
                for (int c = 0; c < w.cols(); ++c) mix(w(r, c));
            const auto& cv = frozen_c[static_cast<std::size_t>(n)];
            for (int r = 0; r < cv.size(); ++r) mix(cv(r));
        }
        return h;
    }

    std::size_t trainable_count() const {
        return static_cast<std::size_t>(steps) * static_cast<std::size_t>(dim) *
               (static_cast<std::size_t>(width) + 1);
    }

    /// Flat layout: per step, A row-major then b.
    void pack_trainable(std::vector<double>& out) const {
        out.resize(trainable_count());
        std::size_t at = 0;
        for (int n = 0; n < steps; ++n) {
            const auto& a = A[static_cast<std::size_t>(n)];
            for (int r = 0; r < a.rows(); ++r)
                for (int c = 0; c < a.cols(); ++c) out[at++] = a(r, c);
            const auto& bn = b[static_cast<std::size_t>(n)];
            for (int r = 0; r < bn.size(); ++r) out[at++] = bn(r);
        }
    }

    void unpack_trainable(const std::vector<double>& in) {
        if (in.size() != trainable_count())
            throw std::invalid_argument("RandomizedNet: flat parameter size mismatch");
        std::size_t at = 0;
        for (int n = 0; n < steps; ++n) {
            auto& a = A[static_cast<std::size_t>(n)];
            for (int r = 0; r < a.rows(); ++r)
                for (int c = 0; c < a.cols(); ++c) a(r, c) = in[at++];
            auto& bn = b[static_cast<std::size_t>(n)];
            for (int r = 0; r < bn.size(); ++r) bn(r) = in[at++];
        }
    }

  private:
    void check_step(int n) const {
        if (n < 0 || n >= steps) throw std::invalid_argument("RandomizedNet: step out of range");
    }
};

/// Batched forward sweep. Columns index paths; hidden activations and
/// controls are cached per step for the backward sweep and the parameter
/// gradients.
struct FeedbackBatch {
    TimeGrid grid{1.0, 1};
    int dim = 0;
    int paths = 0;
    std::vector<Eigen::MatrixXd> states;    // steps+1 entries, dim x paths
    std::vector<Eigen::MatrixXd> hidden;    // steps entries, width x paths (tanh values)
    std::vector<Eigen::MatrixXd> controls;  // steps entries, dim x paths
    std::vector<Eigen::MatrixXd> dw;        // steps entries, dim x paths
};

inline FeedbackBatch feedback_forward(const HjbSpec& spec, const RandomizedNet& net,
                                      TimeGrid grid, int paths, std::uint64_t seed) {
    if (net.dim != spec.dim) throw std::invalid_argument("feedback_forward: dimension mismatch");
    if (net.steps != grid.steps) throw std::invalid_argument("feedback_forward: grid mismatch");
    if (paths < 1) throw std::invalid_argument("feedback_forward: paths must be positive");
    FeedbackBatch batch;
    batch.grid = grid;
    batch.dim = spec.dim;
    batch.paths = paths;
    const double h = grid.dt();
    const double root_h = std::sqrt(h);
    batch.dw.assign(static_cast<std::size_t>(grid.steps),
                    Eigen::MatrixXd(spec.dim, paths));
    for (int i = 0; i < paths; ++i) {
        std::mt19937_64 gen(detail::substream(seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int n = 0; n < grid.steps; ++n)
            for (int j = 0; j < spec.dim; ++j)
                batch.dw[static_cast<std::size_t>(n)](j, i) = root_h * normal(gen);
    }
    batch.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
    batch.hidden.reserve(static_cast<std::size_t>(grid.steps));
    batch.controls.reserve(static_cast<std::size_t>(grid.steps));
    batch.states.push_back(Eigen::MatrixXd::Zero(spec.dim, paths));
    const double drift_scale = 2.0 * std::sqrt(spec.lambda) * h;
    const double noise_scale = std::sqrt(2.0);
    for (int n = 0; n < grid.steps; ++n) {
        const Eigen::MatrixXd& x = batch.states.back();
        Eigen::MatrixXd hid =
            ((net.frozen_w[static_cast<std::size_t>(n)] * x).colwise() +
             net.frozen_c[static_cast<std::size_t>(n)])
                .array()
                .tanh()
                .matrix();
        Eigen::MatrixXd u =
            (net.A[static_cast<std::size_t>(n)] * hid).colwise() +
            net.b[static_cast<std::size_t>(n)];
        Eigen::MatrixXd next =
            x + drift_scale * u + noise_scale * batch.dw[static_cast<std::size_t>(n)];
        batch.hidden.push_back(std::move(hid));
        batch.controls.push_back(std::move(u));
        batch.states.push_back(std::move(next));
    }
    return batch;
}

/// Backward sweep for the co-state. The feedback coupling enters through the
/// control Jacobian J_n = A_n diag(1 - hidden^2) W_n per sample:
///   Y_N = g_x(X_N),
///   Y_n = Y_{n+1} + h ( 2 sqrt(lambda) J_n^T Y_{n+1} + 2 J_n^T u_n ).
/// The second term is the running-cost chain rule through the feedback; a
/// finite-difference test on the sampled cost is the correctness arbiter.
inline std::vector<Eigen::MatrixXd> feedback_adjoint(const HjbSpec& spec,
                                                     const RandomizedNet& net,
                                                     const FeedbackBatch& batch) {
    if (net.steps != batch.grid.steps)
        throw std::invalid_argument("feedback_adjoint: grid mismatch");
    const int n_steps = batch.grid.steps;
    const double h = batch.grid.dt();
    const double two_root_lambda = 2.0 * std::sqrt(spec.lambda);
    std::vector<Eigen::MatrixXd> y(static_cast<std::size_t>(n_steps) + 1);
    Eigen::MatrixXd terminal(batch.dim, batch.paths);
    const Eigen::MatrixXd& xT = batch.states.back();
    for (int i = 0; i < batch.paths; ++i) terminal.col(i) = spec.terminal_grad(xT.col(i));
    y[static_cast<std::size_t>(n_steps)] = std::move(terminal);
    for (int n = n_steps - 1; n >= 0; --n) {
        const Eigen::MatrixXd& ynext = y[static_cast<std::size_t>(n) + 1];
        const Eigen::MatrixXd& hid = batch.hidden[static_cast<std::size_t>(n)];
        const Eigen::MatrixXd& u = batch.controls[static_cast<std::size_t>(n)];
        // J^T v = W^T diag(1 - hid^2) A^T v, columnwise over samples.
        Eigen::MatrixXd inner =
            net.A[static_cast<std::size_t>(n)].transpose() *
            (two_root_lambda * ynext + 2.0 * u);
        inner.array() *= (1.0 - hid.array().square());
        y[static_cast<std::size_t>(n)] =
            ynext + h * (net.frozen_w[static_cast<std::size_t>(n)].transpose() * inner);
    }
    return y;
}

/// Per-sample gradient of the sampled objective slice in (A_n, b_n):
///   dA = (2 sqrt(lambda) y + 2 u(x)) hidden^T,  db = 2 sqrt(lambda) y + 2 u(x).
struct SampleGradient {
    Eigen::MatrixXd dA;
    Eigen::VectorXd db;
};

inline SampleGradient nn_sample_gradient(const HjbSpec& spec, const RandomizedNet& net, int n,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != net.dim || y.size() != net.dim)
        throw std::invalid_argument("nn_sample_gradient: dimension mismatch");
    const Eigen::VectorXd hid = (net.frozen_w[static_cast<std::size_t>(n)] * x +
                                 net.frozen_c[static_cast<std::size_t>(n)])
                                    .array()
                                    .tanh()
                                    .matrix();
    const Eigen::VectorXd u = net.A[static_cast<std::size_t>(n)] * hid +
                              net.b[static_cast<std::size_t>(n)];
    SampleGradient g;
    g.db = 2.0 * std::sqrt(spec.lambda) * y + 2.0 * u;
    g.dA = g.db * hid.transpose();
    return g;
}

/// Batch-averaged parameter gradients, one (dA, db) pair per step, pairing
/// Y_n with the step-n state.
struct NetGradients {
    std::vector<Eigen::MatrixXd> dA;
    std::vector<Eigen::VectorXd> db;

    double squared_norm() const {
        double s = 0.0;
        for (const auto& m : dA) s += m.squaredNorm();
        for (const auto& v : db) s += v.squaredNorm();
        return s;
    }

    void pack(std::vector<double>& out) const {
        std::size_t count = 0;
        for (std::size_t n = 0; n < dA.size(); ++n)
            count += static_cast<std::size_t>(dA[n].size()) + static_cast<std::size_t>(db[n].size());
        out.resize(count);
        std::size_t at = 0;
        for (std::size_t n = 0; n < dA.size(); ++n) {
            const auto& a = dA[n];
            for (int r = 0; r < a.rows(); ++r)
                for (int c = 0; c < a.cols(); ++c) out[at++] = a(r, c);
            for (int r = 0; r < db[n].size(); ++r) out[at++] = db[n](r);
        }
    }
};

inline NetGradients net_batch_gradients(const HjbSpec& spec, const RandomizedNet& net,
                                        const FeedbackBatch& batch,
                                        const std::vector<Eigen::MatrixXd>& y) {
    if (y.size() != batch.states.size())
        throw std::invalid_argument("net_batch_gradients: adjoint/state mismatch");
    NetGradients g;
    g.dA.reserve(static_cast<std::size_t>(net.steps));
    g.db.reserve(static_cast<std::size_t>(net.steps));
    const double inv_m = 1.0 / batch.paths;
    const double two_root_lambda = 2.0 * std::sqrt(spec.lambda);
    for (int n = 0; n < net.steps; ++n) {
        const Eigen::MatrixXd common = two_root_lambda * y[static_cast<std::size_t>(n)] +
                                       2.0 * batch.controls[static_cast<std::size_t>(n)];
        g.dA.push_back(inv_m * (common * batch.hidden[static_cast<std::size_t>(n)].transpose()));
        g.db.push_back(inv_m * common.rowwise().sum());
    }
    return g;
}

/// Sampled cost of a batch: mean of sum_n |u_n|^2 h + g(X_N).
struct CostEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

inline CostEstimate batch_cost(const HjbSpec& spec, const FeedbackBatch& batch) {
    const double h = batch.grid.dt();
    Eigen::VectorXd per_path = Eigen::VectorXd::Zero(batch.paths);
    for (const auto& u : batch.controls)
        per_path += h * u.colwise().squaredNorm().transpose();
    const Eigen::MatrixXd& xT = batch.states.back();
    for (int i = 0; i < batch.paths; ++i) per_path(i) += spec.terminal(xT.col(i));
    CostEstimate est;
    est.value = per_path.mean();
    if (batch.paths > 1) {
        const double var =
            (per_path.array() - est.value).square().sum() / (batch.paths - 1);
        est.std_error = std::sqrt(var / batch.paths);
    }
    return est;
}

inline CostEstimate batch_cost(const HjbSpec& spec, const RandomizedNet& net, TimeGrid grid,
                               int paths, std::uint64_t seed) {
    const FeedbackBatch batch = feedback_forward(spec, net, grid, paths, seed);
    return batch_cost(spec, batch);
}

inline CostEstimate simulate_cost(const HjbSpec& spec, const RandomizedNet& net, TimeGrid grid,
                                  int paths, std::uint64_t seed) {
    return batch_cost(spec, net, grid, paths, seed);
}

/// Monte-Carlo value of v(0, 0) through the exponential transformation:
///   v(0,0) = -(1/lambda) log E[ exp(-lambda g(sqrt(2) W_T)) ],
/// with a delta-method standard error. Draws are sequential from one stream,
/// so the result is deterministic given (samples, seed).
struct ReferenceValue {
    double value = 0.0;
    double std_error = 0.0;
};

inline ReferenceValue reference_value(const HjbSpec& spec, long long samples,
                                      std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("reference_value: samples must be positive");
    std::mt19937_64 gen(detail::splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(2.0 * spec.horizon);
    double sum = 0.0, sum_sq = 0.0;
    Eigen::VectorXd x(spec.dim);
    for (long long s = 0; s < samples; ++s) {
        for (int j = 0; j < spec.dim; ++j) x(j) = scale * normal(gen);
        const double w = std::exp(-spec.lambda * spec.terminal(x));
        sum += w;
        sum_sq += w * w;
    }
    const double mean = sum / static_cast<double>(samples);
    if (!(mean > 0.0))
        throw std::runtime_error(
            "reference_value: exponential moment underflowed to zero; lambda or terminal cost "
            "too large for double precision");
    ReferenceValue ref;
    ref.value = -std::log(mean) / spec.lambda;
    if (samples > 1) {
        const double var =
            (sum_sq - static_cast<double>(samples) * mean * mean) / (static_cast<double>(samples) - 1.0);
        const double se_mean = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
        ref.std_error = se_mean / (spec.lambda * mean);
    }
    return ref;
}

}  // namespace bsmp::hjb
