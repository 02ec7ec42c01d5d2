#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsmp/optimize.hpp"
#include "bsmp/param_optimizers.hpp"
#include "bsmp/problems/hjb.hpp"

namespace bsmp::hjb {

enum class ParamOptimizer { sgd, adagrad, adam };

struct TrainConfig {
    TimeGrid grid{1.0, 20};
    int batch = 1024;
    int epochs = 380;
    double lr = 2e-3;
    ParamOptimizer optimizer = ParamOptimizer::adam;
    int width = 128;
    double weight_scale = 0.0;  // <= 0 means 1/sqrt(dim)
    std::uint64_t seed = 1;
};

struct EpochRecord {
    int epoch = 0;          // 1-based
    double cost = 0.0;      // training-batch value estimate at the pre-update net
    double grad_norm = 0.0;
    double wall_time_s = 0.0;  // cumulative
};

struct TrainResult {
    RandomizedNet net;
    std::vector<EpochRecord> history;
};

class TrainDivergence : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One gradient step per epoch on a fresh simulated batch. The gradient is
/// the batch mean of the per-sample slice gradients, not scaled by the time
/// step; the step scale is owned entirely by the learning rate.
inline TrainResult train(const HjbSpec& spec, const TrainConfig& cfg) {
    if (cfg.batch < 1) throw std::invalid_argument("hjb::train: batch must be positive");
    if (cfg.epochs < 0) throw std::invalid_argument("hjb::train: negative epochs");
    if (!(cfg.lr > 0.0)) throw std::invalid_argument("hjb::train: lr must be positive");
    const double scale = cfg.weight_scale > 0.0 ? cfg.weight_scale : 1.0 / std::sqrt(spec.dim);
    const std::uint64_t init_seed = detail::substream(cfg.seed, 1);
    const std::uint64_t noise_root = detail::substream(cfg.seed, 2);

    TrainResult res;
    res.net = RandomizedNet::init(spec.dim, cfg.width, cfg.grid.steps, scale, init_seed);
    res.history.reserve(static_cast<std::size_t>(cfg.epochs));

    std::vector<double> params, grads;
    AdagradState adagrad;
    AdamState adam;
    bsmp::detail::StopWatch watch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::uint64_t epoch_seed =
            detail::substream(noise_root, static_cast<std::uint64_t>(epoch));
        const FeedbackBatch batch =
            feedback_forward(spec, res.net, cfg.grid, cfg.batch, epoch_seed);
        const CostEstimate cost = batch_cost(spec, batch);
        const std::vector<Eigen::MatrixXd> y = feedback_adjoint(spec, res.net, batch);
        const NetGradients g = net_batch_gradients(spec, res.net, batch, y);
        const double gnorm = std::sqrt(g.squared_norm());
        if (!std::isfinite(cost.value) || !std::isfinite(gnorm))
            throw TrainDivergence("hjb::train: non-finite cost or gradient at epoch " +
                                  std::to_string(epoch + 1));

        res.net.pack_trainable(params);
        g.pack(grads);
        switch (cfg.optimizer) {
            case ParamOptimizer::sgd:
                sgd_step(params, grads, cfg.lr);
                break;
            case ParamOptimizer::adagrad:
                adagrad_step(params, grads, adagrad, cfg.lr);
                break;
            case ParamOptimizer::adam:
                adam_step(params, grads, adam, cfg.lr);
                break;
        }
        res.net.unpack_trainable(params);
        for (double v : params)
            if (!std::isfinite(v))
                throw TrainDivergence("hjb::train: parameters diverged at epoch " +
                                      std::to_string(epoch + 1));
        res.history.push_back({epoch + 1, cost.value, gnorm, watch.seconds()});
    }
    return res;
}

}  // namespace bsmp::hjb
