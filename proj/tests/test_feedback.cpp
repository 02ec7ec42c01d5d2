#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "bsmp/problems/hjb.hpp"
#include "bsmp/problems/hjb_train.hpp"

namespace {

using namespace bsmp;
using namespace bsmp::hjb;

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Deterministic non-trivial trainable layers on top of seeded frozen ones.
RandomizedNet patterned_net(int dim, int width, int steps, std::uint64_t seed) {
    RandomizedNet net = RandomizedNet::init(dim, width, steps, 0.6, seed);
    for (int n = 0; n < steps; ++n) {
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < width; ++c)
                net.A[n](r, c) = 0.05 * std::sin(1.0 + 0.7 * r + 0.3 * c + 0.11 * n);
            net.b[n](r) = 0.02 * std::cos(0.5 + 0.4 * r + 0.2 * n);
        }
    }
    return net;
}

TEST(HjbSpec, StandardTerminalAndGradientAgree) {
    HjbSpec spec = HjbSpec::standard(4, 1.0);
    Eigen::VectorXd x(4);
    x << 0.3, -1.2, 0.8, 0.1;
    EXPECT_DOUBLE_EQ(spec.terminal(x), std::log(0.5 * (1.0 + x.squaredNorm())));

    const Eigen::VectorXd g = spec.terminal_grad(x);
    const double eps = 1e-6;
    for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += eps;
        xm(j) -= eps;
        const double fd = (spec.terminal(xp) - spec.terminal(xm)) / (2.0 * eps);
        EXPECT_NEAR(g(j), fd, 1e-9);
    }
    EXPECT_THROW(HjbSpec::standard(0, 1.0), std::invalid_argument);
    EXPECT_THROW(HjbSpec::standard(3, 0.0), std::invalid_argument);
}

TEST(Net, ScalarForwardHandValue) {
    RandomizedNet net = RandomizedNet::init(1, 1, 1, 1.0, 3);
    net.frozen_w[0](0, 0) = 0.1;
    net.frozen_c[0](0) = 0.0;
    net.A[0](0, 0) = 2.0;
    net.b[0](0) = 0.5;
    Eigen::VectorXd x(1);
    x << 1.0;
    const Eigen::VectorXd u = net.forward(0, x);
    EXPECT_DOUBLE_EQ(u(0), 2.0 * std::tanh(0.1) + 0.5);
    EXPECT_NEAR(u(0), 0.6993359892499116, 1e-12);
}

TEST(Net, FreshNetIsZeroControl) {
    RandomizedNet net = RandomizedNet::init(3, 8, 2, 0.5, 9);
    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 0.5;
    EXPECT_EQ(net.forward(0, x).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(net.forward(1, x).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(net.forward(2, x), std::invalid_argument);
}

TEST(Net, FrozenHashIsSeedDeterministic) {
    RandomizedNet a = RandomizedNet::init(4, 6, 3, 0.7, 42);
    RandomizedNet b = RandomizedNet::init(4, 6, 3, 0.7, 42);
    RandomizedNet c = RandomizedNet::init(4, 6, 3, 0.7, 43);
    EXPECT_EQ(a.frozen_hash(), b.frozen_hash());
    EXPECT_NE(a.frozen_hash(), c.frozen_hash());

    // The hash tracks frozen layers only.
    b.A[0](0, 0) = 5.0;
    EXPECT_EQ(a.frozen_hash(), b.frozen_hash());
    b.frozen_c[0](0) += 1.0;
    EXPECT_NE(a.frozen_hash(), b.frozen_hash());
}

TEST(Net, PackUnpackRoundTrip) {
    RandomizedNet net = patterned_net(3, 5, 4, 7);
    std::vector<double> flat;
    net.pack_trainable(flat);
    ASSERT_EQ(flat.size(), net.trainable_count());

    RandomizedNet other = RandomizedNet::init(3, 5, 4, 0.6, 7);
    other.unpack_trainable(flat);
    for (int n = 0; n < 4; ++n) {
        EXPECT_EQ(max_abs_diff(net.A[n], other.A[n]), 0.0);
        EXPECT_EQ((net.b[n] - other.b[n]).cwiseAbs().maxCoeff(), 0.0);
    }
    flat.pop_back();
    EXPECT_THROW(other.unpack_trainable(flat), std::invalid_argument);
}

TEST(Feedback, ForwardMatchesPerSampleRecursion) {
    HjbSpec spec = HjbSpec::standard(3, 0.7);
    RandomizedNet net = patterned_net(3, 5, 4, 11);
    TimeGrid g(1.0, 4);
    FeedbackBatch batch = feedback_forward(spec, net, g, 3, 99);

    ASSERT_EQ(batch.states.size(), 5u);
    EXPECT_EQ(batch.states[0].cwiseAbs().maxCoeff(), 0.0);

    const double h = g.dt();
    for (int n = 0; n < 4; ++n) {
        for (int i = 0; i < 3; ++i) {
            const Eigen::VectorXd x = batch.states[n].col(i);
            const Eigen::VectorXd u = net.forward(n, x);
            EXPECT_NEAR((batch.controls[n].col(i) - u).cwiseAbs().maxCoeff(), 0.0, 1e-14);
            const Eigen::VectorXd next = x + 2.0 * std::sqrt(spec.lambda) * h * u +
                                         std::sqrt(2.0) * batch.dw[n].col(i);
            EXPECT_NEAR((batch.states[n + 1].col(i) - next).cwiseAbs().maxCoeff(), 0.0, 1e-14);
        }
    }
}

TEST(Feedback, NoiseStreamsStableUnderBatchGrowth) {
    HjbSpec spec = HjbSpec::standard(2, 1.0);
    RandomizedNet net = RandomizedNet::init(2, 3, 5, 0.5, 1);
    TimeGrid g(1.0, 5);
    FeedbackBatch small = feedback_forward(spec, net, g, 2, 77);
    FeedbackBatch big = feedback_forward(spec, net, g, 6, 77);
    for (int n = 0; n < 5; ++n)
        EXPECT_EQ(max_abs_diff(small.dw[n], big.dw[n].leftCols(2)), 0.0);
}

TEST(Adjoint, TerminalColumnIsTerminalGradient) {
    HjbSpec spec = HjbSpec::standard(3, 1.0);
    RandomizedNet net = patterned_net(3, 4, 3, 5);
    TimeGrid g(1.0, 3);
    FeedbackBatch batch = feedback_forward(spec, net, g, 4, 13);
    std::vector<Eigen::MatrixXd> y = feedback_adjoint(spec, net, batch);
    ASSERT_EQ(y.size(), 4u);
    for (int i = 0; i < 4; ++i) {
        const Eigen::VectorXd expected = spec.terminal_grad(batch.states[3].col(i));
        EXPECT_EQ((y[3].col(i) - expected).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Adjoint, ZeroOuterLayerFreezesCostate) {
    // A = 0 kills the feedback Jacobian, so Y is constant in time path by path.
    HjbSpec spec = HjbSpec::standard(4, 2.0);
    RandomizedNet net = RandomizedNet::init(4, 6, 5, 0.5, 21);
    TimeGrid g(1.0, 5);
    FeedbackBatch batch = feedback_forward(spec, net, g, 3, 31);
    std::vector<Eigen::MatrixXd> y = feedback_adjoint(spec, net, batch);
    for (int n = 0; n < 5; ++n) EXPECT_EQ(max_abs_diff(y[n], y[5]), 0.0);
}

TEST(Gradient, ScalarHandValues) {
    // width 1, dim 1, lambda 1: db = 2y + 2u, dA = db * tanh(w x + c).
    HjbSpec spec = HjbSpec::standard(1, 1.0);
    RandomizedNet net = RandomizedNet::init(1, 1, 1, 1.0, 2);
    net.frozen_w[0](0, 0) = 1.0;
    net.frozen_c[0](0) = 0.0;
    net.A[0](0, 0) = 1.0;
    net.b[0](0) = 0.0;

    Eigen::VectorXd x(1), y(1);
    x << 0.0;
    y << 0.75;
    SampleGradient g0 = nn_sample_gradient(spec, net, 0, x, y);
    EXPECT_DOUBLE_EQ(g0.db(0), 1.5);  // u(0) = tanh(0) = 0
    EXPECT_DOUBLE_EQ(g0.dA(0, 0), 0.0);

    x << 1.0;
    y << 0.5;
    const double th = std::tanh(1.0);
    SampleGradient g1 = nn_sample_gradient(spec, net, 0, x, y);
    EXPECT_DOUBLE_EQ(g1.db(0), 1.0 + 2.0 * th);
    EXPECT_DOUBLE_EQ(g1.dA(0, 0), (1.0 + 2.0 * th) * th);
}

TEST(Gradient, BatchMeanMatchesSampleGradients) {
    HjbSpec spec = HjbSpec::standard(3, 0.8);
    RandomizedNet net = patterned_net(3, 4, 3, 17);
    TimeGrid g(1.0, 3);
    const int M = 5;
    FeedbackBatch batch = feedback_forward(spec, net, g, M, 41);
    std::vector<Eigen::MatrixXd> y = feedback_adjoint(spec, net, batch);
    NetGradients grads = net_batch_gradients(spec, net, batch, y);

    for (int n = 0; n < 3; ++n) {
        Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(3, 4);
        Eigen::VectorXd db = Eigen::VectorXd::Zero(3);
        for (int i = 0; i < M; ++i) {
            SampleGradient s =
                nn_sample_gradient(spec, net, n, batch.states[n].col(i), y[n].col(i));
            dA += s.dA;
            db += s.db;
        }
        EXPECT_LT(max_abs_diff(grads.dA[n], dA / M), 1e-14);
        EXPECT_LT((grads.db[n] - db / M).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Gradient, MatchesFiniteDifferencesOnObjectiveSlice) {
    // eta(A, b) = 2 sqrt(lambda) u'y + |u|^2 at fixed (x, y): the sample
    // gradient must agree with central differences to 1e-6 relative.
    HjbSpec spec = HjbSpec::standard(3, 1.3);
    RandomizedNet net = patterned_net(3, 5, 2, 23);
    Eigen::VectorXd x(3), y(3);
    x << 0.4, -1.1, 0.7;
    y << -0.3, 0.6, 0.2;
    const int n = 1;

    auto eta = [&](const RandomizedNet& candidate) {
        const Eigen::VectorXd u = candidate.forward(n, x);
        return 2.0 * std::sqrt(spec.lambda) * u.dot(y) + u.squaredNorm();
    };

    SampleGradient g = nn_sample_gradient(spec, net, n, x, y);
    const double eps = 1e-6;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
            RandomizedNet up = net, dn = net;
            up.A[n](r, c) += eps;
            dn.A[n](r, c) -= eps;
            const double fd = (eta(up) - eta(dn)) / (2.0 * eps);
            EXPECT_NEAR(g.dA(r, c), fd, 1e-6 * std::max(1.0, std::abs(fd))) << r << "," << c;
        }
        RandomizedNet up = net, dn = net;
        up.b[n](r) += eps;
        dn.b[n](r) -= eps;
        const double fd = (eta(up) - eta(dn)) / (2.0 * eps);
        EXPECT_NEAR(g.db(r), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "b " << r;
    }
}

TEST(Gradient, ExactDiscreteFormMatchesPathwiseCostDifferences) {
    // Single fixed path: the adjoint output gives the exact gradient of the
    // sampled cost through h (2 sqrt(lambda) Y_{n+1} + 2 u_n) paired with the
    // step-n activations. Central differences on the whole rollout agree to
    // 1e-4.
    HjbSpec spec = HjbSpec::standard(2, 0.7);
    const int width = 3, steps = 4;
    RandomizedNet net = patterned_net(2, width, steps, 29);
    TimeGrid g(1.0, steps);
    const std::uint64_t seed = 57;

    auto cost = [&](const RandomizedNet& candidate) {
        return batch_cost(spec, candidate, g, 1, seed).value;
    };

    FeedbackBatch batch = feedback_forward(spec, net, g, 1, seed);
    std::vector<Eigen::MatrixXd> y = feedback_adjoint(spec, net, batch);
    const double h = g.dt();
    const double eps = 1e-5;
    for (int n = 0; n < steps; ++n) {
        const Eigen::VectorXd common =
            h * (2.0 * std::sqrt(spec.lambda) * y[n + 1].col(0) + 2.0 * batch.controls[n].col(0));
        const Eigen::MatrixXd dA = common * batch.hidden[n].col(0).transpose();
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < width; ++c) {
                RandomizedNet up = net, dn = net;
                up.A[n](r, c) += eps;
                dn.A[n](r, c) -= eps;
                const double fd = (cost(up) - cost(dn)) / (2.0 * eps);
                EXPECT_NEAR(dA(r, c), fd, 1e-4 * std::max(1.0, std::abs(fd)))
                    << "A " << n << "," << r << "," << c;
            }
            RandomizedNet up = net, dn = net;
            up.b[n](r) += eps;
            dn.b[n](r) -= eps;
            const double fd = (cost(up) - cost(dn)) / (2.0 * eps);
            EXPECT_NEAR(common(r), fd, 1e-4 * std::max(1.0, std::abs(fd))) << "b " << n << "," << r;
        }
    }
}

TEST(Value, DegenerateTerminalCosts) {
    HjbSpec spec = HjbSpec::standard(5, 2.5);
    spec.terminal = [](const Eigen::VectorXd&) { return 0.0; };
    ReferenceValue zero = reference_value(spec, 5000, 3);
    EXPECT_NEAR(zero.value, 0.0, 1e-14);
    EXPECT_NEAR(zero.std_error, 0.0, 1e-14);

    spec.terminal = [](const Eigen::VectorXd&) { return 0.7; };
    ReferenceValue shifted = reference_value(spec, 5000, 3);
    EXPECT_NEAR(shifted.value, 0.7, 1e-12);
}

TEST(Value, DeterministicGivenSeed) {
    HjbSpec spec = HjbSpec::standard(10, 1.0);
    ReferenceValue a = reference_value(spec, 20000, 1234);
    ReferenceValue b = reference_value(spec, 20000, 1234);
    ReferenceValue c = reference_value(spec, 20000, 1235);
    EXPECT_EQ(a.value, b.value);
    EXPECT_NE(a.value, c.value);
    EXPECT_GT(a.std_error, 0.0);
}

TEST(Value, DecreasesInRiskParameter) {
    // -(1/lambda) log E[exp(-lambda G)] is nonincreasing in lambda; on shared
    // draws of a non-degenerate G the ordering is strict.
    HjbSpec half = HjbSpec::standard(10, 0.5);
    HjbSpec one = HjbSpec::standard(10, 1.0);
    HjbSpec five = HjbSpec::standard(10, 5.0);
    const long long n = 200000;
    EXPECT_GT(reference_value(half, n, 7).value, reference_value(one, n, 7).value);
    EXPECT_GT(reference_value(one, n, 7).value, reference_value(five, n, 7).value);
}

TEST(Value, SmallRiskLimitIsPlainExpectation) {
    HjbSpec spec = HjbSpec::standard(10, 1e-4);
    const long long samples = 100000;
    const std::uint64_t seed = 99;
    ReferenceValue v = reference_value(spec, samples, seed);

    // Same stream, same draw order: the plain Monte-Carlo mean of G.
    std::mt19937_64 gen(bsmp::detail::splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(2.0 * spec.horizon);
    double mean_g = 0.0;
    Eigen::VectorXd x(spec.dim);
    for (long long s = 0; s < samples; ++s) {
        for (int j = 0; j < spec.dim; ++j) x(j) = scale * normal(gen);
        mean_g += spec.terminal(x);
    }
    mean_g /= static_cast<double>(samples);
    EXPECT_NEAR(v.value, mean_g, 1e-3);
    EXPECT_LT(v.value, mean_g);  // exponential tilt favors low outcomes
}

TEST(Value, ThrowsWhenExponentialMomentUnderflows) {
    HjbSpec spec = HjbSpec::standard(10, 1e5);
    EXPECT_THROW(reference_value(spec, 500, 5), std::runtime_error);
}

TEST(Cost, UncontrolledBatchMatchesTerminalExpectation) {
    // Zero net: the sampled cost is E[g(sqrt(2T) xi)], estimated two ways on
    // independent streams; it also cannot beat the optimal value.
    HjbSpec spec = HjbSpec::standard(10, 1.0);
    RandomizedNet net = RandomizedNet::init(10, 4, 20, 0.3, 61);
    TimeGrid g(1.0, 20);
    CostEstimate cost = simulate_cost(spec, net, g, 100000, 71);

    ReferenceValue plain = reference_value(HjbSpec::standard(10, 1e-9), 200000, 81);
    EXPECT_NEAR(cost.value, plain.value, 3.0 * cost.std_error + 0.01);

    ReferenceValue optimal = reference_value(spec, 1000000, 91);
    EXPECT_GT(cost.value, optimal.value - 3.0 * cost.std_error);
    EXPECT_GT(cost.std_error, 0.0);
}

TEST(Train, SmokeRunImprovesAndKeepsFrozenLayers) {
    HjbSpec spec = HjbSpec::standard(3, 1.0);
    TrainConfig cfg;
    cfg.grid = TimeGrid(1.0, 8);
    cfg.batch = 128;
    cfg.epochs = 60;
    cfg.lr = 5e-3;
    cfg.width = 16;
    cfg.seed = 5;
    TrainResult res = train(spec, cfg);

    ASSERT_EQ(res.history.size(), 60u);
    EXPECT_EQ(res.history.front().epoch, 1);
    EXPECT_EQ(res.history.back().epoch, 60);
    for (std::size_t j = 1; j < res.history.size(); ++j)
        EXPECT_GE(res.history[j].wall_time_s, res.history[j - 1].wall_time_s);

    // Averaged late window beats the first epoch's cost estimate.
    double late = 0.0;
    for (std::size_t j = res.history.size() - 10; j < res.history.size(); ++j)
        late += res.history[j].cost;
    late /= 10.0;
    EXPECT_LT(late, res.history.front().cost - 0.02);

    // Frozen layers never move: the trained net hashes like a fresh init from
    // the same derived seed and scale.
    RandomizedNet fresh = RandomizedNet::init(3, 16, 8, 1.0 / std::sqrt(3.0),
                                              bsmp::detail::substream(5, 1));
    EXPECT_EQ(res.net.frozen_hash(), fresh.frozen_hash());
}

TEST(Train, RejectsBadConfig) {
    HjbSpec spec = HjbSpec::standard(2, 1.0);
    TrainConfig cfg;
    cfg.batch = 0;
    EXPECT_THROW(train(spec, cfg), std::invalid_argument);
    cfg.batch = 8;
    cfg.lr = 0.0;
    EXPECT_THROW(train(spec, cfg), std::invalid_argument);
}

TEST(Feedback, RejectsMismatchedShapes) {
    HjbSpec spec = HjbSpec::standard(3, 1.0);
    RandomizedNet net = RandomizedNet::init(2, 4, 5, 0.5, 1);
    EXPECT_THROW(feedback_forward(spec, net, TimeGrid(1.0, 5), 2, 1), std::invalid_argument);
    RandomizedNet ok = RandomizedNet::init(3, 4, 5, 0.5, 1);
    EXPECT_THROW(feedback_forward(spec, ok, TimeGrid(1.0, 4), 2, 1), std::invalid_argument);
    EXPECT_THROW(feedback_forward(spec, ok, TimeGrid(1.0, 5), 0, 1), std::invalid_argument);
}

}  // namespace
