#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gradient_check.hpp"
#include "surgenet/oracle.hpp"
#include "surgenet/training.hpp"

namespace surgenet {
namespace {

Architecture make_arch(std::size_t in, std::vector<std::size_t> hidden, std::size_t out,
                       Activation act = Activation::tanh) {
    Architecture a;
    a.input_dim = in;
    a.hidden_sizes = std::move(hidden);
    a.output_dim = out;
    a.activation = act;
    return a;
}

Batch random_batch(Rng& rng, std::size_t rows, std::size_t in, std::size_t out) {
    Batch b{Matrix(rows, in), Matrix(rows, out)};
    for (double& v : b.inputs.values()) v = rng.uniform(-2.0, 2.0);
    for (double& v : b.targets.values()) v = rng.uniform(-1.0, 3.0);
    return b;
}

// ---------------------------------------------------------------------------
// Normalizer

TEST(FitNormalizer, IdenticalTracksAreAllConstant) {
    std::vector<Vector> rows(10, Vector{1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    const auto n = fit_normalizer(rows);
    for (bool c : n.constant) EXPECT_TRUE(c);
    EXPECT_EQ(n.apply(rows[0]), Vector(6, 0.0));
}

TEST(FitNormalizer, HandComputedFeature) {
    const auto n = fit_normalizer(std::vector<Vector>{{0.0}, {2.0}});
    EXPECT_DOUBLE_EQ(n.means[0], 1.0);
    EXPECT_DOUBLE_EQ(n.stds[0], 1.0);
    EXPECT_THROW(fit_normalizer(std::vector<Vector>{}), InvalidArgument);
}

TEST(FitNormalizer, TrainingRowsStandardizeAndInvert) {
    const auto tracks = generate_corpus(12, 77, OracleParams::defaults());
    const auto n = fit_normalizer(tracks);
    std::vector<Vector> z;
    for (const auto& t : tracks) {
        for (const auto& row : t.rows) {
            const auto in = row.inputs.as_array();
            z.push_back(n.apply(in));
            const auto back = n.invert(z.back());
            for (std::size_t i = 0; i < in.size(); ++i) EXPECT_NEAR(back[i], in[i], 1e-12 * std::max(1.0, std::abs(in[i])));
        }
    }
    const auto zs = column_stats(z);
    for (std::size_t c = 0; c < 6; ++c) EXPECT_LT(std::abs(zs.means[c]), 1e-9);
}

// ---------------------------------------------------------------------------
// Backprop

TEST(Backprop, ExactTargetGivesZeroLossAndGradient) {
    Rng rng(1);
    const auto net = init_network(make_arch(6, {4, 5}, 10), rng);
    Vector x(6);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const auto y = forward(net, x).output;
    const auto lg = backprop(net, x, y);
    EXPECT_EQ(lg.loss, 0.0);
    EXPECT_EQ(lg.grads.max_abs_diff(GradientSet::zeros_like(net)), 0.0);
}

TEST(Backprop, ZeroNetworkHandDerivative) {
    const auto net = zero_network(make_arch(6, {4}, 10));
    Vector t(10);
    for (std::size_t i = 0; i < 10; ++i) t[i] = 0.1 * static_cast<double>(i) - 0.3;
    double norm2 = 0.0;
    for (double v : t) norm2 += v * v;
    const auto lg = backprop(net, Vector(6, 0.5), t);
    EXPECT_DOUBLE_EQ(lg.loss, norm2 / 10.0);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_DOUBLE_EQ(lg.grads.layers[1].bias[i], -2.0 * t[i] / 10.0);
    }
}

TEST(Backprop, MatchesFiniteDifferences) {
    Rng rng(2024);
    for (auto act : {Activation::tanh, Activation::sigmoid}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto net = init_network(make_arch(6, {4, 5}, 10, act), rng);
            Vector x(6), t(10);
            for (double& v : x) v = rng.uniform(-1.5, 1.5);
            for (double& v : t) v = rng.uniform(-1.0, 1.0);
            const auto r = test::check_gradients(net, x, t);
            EXPECT_EQ(r.checked, param_count(net.arch));
            EXPECT_LT(r.worst_relative_error, 1e-6);
        }
    }
}

TEST(Backprop, DimensionMismatch) {
    const auto net = zero_network(make_arch(6, {4}, 10));
    EXPECT_THROW(backprop(net, Vector(5, 0.0), Vector(10, 0.0)), InvalidArgument);
    EXPECT_THROW(backprop(net, Vector(6, 0.0), Vector(9, 0.0)), InvalidArgument);
}

TEST(Backprop, BatchGradientIsMeanOfSampleGradients) {
    Rng rng(3);
    const auto net = init_network(make_arch(6, {6, 3}, 10), rng);
    const auto batch = random_batch(rng, 9, 6, 10);
    auto mean = GradientSet::zeros_like(net);
    double loss = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const auto lg = backprop(net, batch.inputs.row(r), batch.targets.row(r));
        mean.add_scaled(lg.grads, 1.0 / 9.0);
        loss += lg.loss / 9.0;
    }
    const auto full = shard_gradient(net, batch, 0, batch.rows());
    EXPECT_NEAR(full.loss, loss, 1e-13);
    EXPECT_LT(full.grads.max_abs_diff(mean), 1e-13);
}

// ---------------------------------------------------------------------------
// Adam

TEST(Adam, ZeroGradientLeavesParametersAndIncrementsStep) {
    Rng rng(4);
    auto net = init_network(make_arch(6, {4}, 10), rng);
    const auto before = net;
    auto state = AdamState::zeros_like(net);
    adam_step(net, GradientSet::zeros_like(net), state, 0.1, AdamConfig{});
    EXPECT_EQ(net, before);
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, QuadraticConverges) {
    Vector theta{0.0}, m{0.0}, v{0.0};
    const AdamConfig cfg;
    std::uint64_t steps = 0;
    for (std::uint64_t t = 1; t <= 2000; ++t) {
        const Vector g{2.0 * (theta[0] - 3.0)};
        adam_update(theta, g, m, v, t, 0.1, cfg);
        steps = t;
        if (std::abs(theta[0] - 3.0) < 1e-3) break;
    }
    EXPECT_LT(std::abs(theta[0] - 3.0), 1e-3);
    EXPECT_LE(steps, 2000u);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
    const AdamConfig cfg;
    for (double g : {-5.0, -1e-3, 0.25, 40.0}) {
        Vector theta{1.0}, m{0.0}, v{0.0};
        adam_update(theta, Vector{g}, m, v, 1, 0.01, cfg);
        const double delta = theta[0] - 1.0;
        // Bias-corrected first step: -lr * g / (|g| + eps).
        EXPECT_LT(delta * g, 0.0);
        EXPECT_LE(std::abs(delta), 0.01 * (1.0 + 1e-12));
        EXPECT_NEAR(std::abs(delta), 0.01 * std::abs(g) / (std::abs(g) + cfg.epsilon), 1e-15);
    }
}

TEST(Adam, ConfigValidation) {
    EXPECT_THROW((AdamConfig{1.0, 0.999, 1e-8}.validate()), InvalidArgument);
    EXPECT_THROW((AdamConfig{0.9, 0.0, 1e-8}.validate()), InvalidArgument);
    EXPECT_THROW((AdamConfig{0.9, 0.999, 0.0}.validate()), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Batching and parallel gradients

std::vector<PreparedTrack> prepared_corpus(std::size_t n, std::uint64_t seed) {
    const auto tracks = generate_corpus(n, seed, OracleParams::defaults());
    return prepare_tracks(tracks, fit_normalizer(tracks));
}

TEST(SampleBatch, WholeCorpusUsesEveryTrackOnce) {
    const auto tracks = prepared_corpus(6, 5);
    Rng rng(1);
    const auto batch = sample_batch(rng, tracks, 6);
    ASSERT_EQ(batch.rows(), 6 * kRowsPerTrack);
    std::multiset<double> seen, expected;
    for (std::size_t t = 0; t < 6; ++t) {
        expected.insert(batch.inputs(t * kRowsPerTrack, 5));
        seen.insert(tracks[t].inputs(0, 5));
    }
    EXPECT_EQ(seen, expected);
}

TEST(SampleBatch, RowCountAndDeterminism) {
    const auto tracks = prepared_corpus(25, 6);
    Rng a(9), b(9);
    for (int i = 0; i < 5; ++i) {
        const auto ba = sample_batch(a, tracks, 19);
        const auto bb = sample_batch(b, tracks, 19);
        EXPECT_EQ(ba.rows(), 3667u);
        EXPECT_EQ(ba.inputs, bb.inputs);
        EXPECT_EQ(ba.targets, bb.targets);
    }
}

TEST(SampleBatch, TracksAreDistinct) {
    const auto tracks = prepared_corpus(10, 7);
    Rng rng(3);
    const auto batch = sample_batch(rng, tracks, 8);
    std::set<double> first_rows;
    for (std::size_t t = 0; t < 8; ++t) first_rows.insert(batch.inputs(t * kRowsPerTrack, 1));
    EXPECT_EQ(first_rows.size(), 8u);
}

TEST(SampleBatch, Errors) {
    const auto tracks = prepared_corpus(3, 8);
    Rng rng(1);
    EXPECT_THROW(sample_batch(rng, tracks, 4), InvalidArgument);
    EXPECT_THROW(sample_batch(rng, tracks, 0), InvalidArgument);
}

TEST(ParallelGradient, ShardPartition) {
    using Bounds = std::vector<std::pair<std::size_t, std::size_t>>;
    EXPECT_EQ(shard_bounds(5, 2), (Bounds{{0, 3}, {3, 5}}));
    EXPECT_EQ(shard_bounds(5, 1), (Bounds{{0, 5}}));
    EXPECT_EQ(shard_bounds(3, 8), (Bounds{{0, 1}, {1, 2}, {2, 3}}));
    EXPECT_EQ(shard_bounds(10, 4), (Bounds{{0, 3}, {3, 6}, {6, 8}, {8, 10}}));
    EXPECT_THROW(shard_bounds(5, 0), InvalidArgument);
}

TEST(ParallelGradient, SingleWorkerEqualsFullBatch) {
    Rng rng(10);
    const auto net = init_network(make_arch(6, {8, 12}, 10), rng);
    const auto batch = random_batch(rng, 50, 6, 10);
    const auto direct = shard_gradient(net, batch, 0, batch.rows());
    const auto par = parallel_gradient(net, batch, 1);
    EXPECT_EQ(par.grads, direct.grads);
    EXPECT_EQ(par.loss, direct.loss);
}

TEST(ParallelGradient, WorkerCountInvariance) {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto net = init_network(make_arch(6, {16, 32}, 10), rng);
        const auto batch = random_batch(rng, 5 + rng.below(400), 6, 10);
        const auto ref = parallel_gradient(net, batch, 1);
        for (std::size_t w : {2u, 3u, 4u, 8u}) {
            const auto g = parallel_gradient(net, batch, w);
            EXPECT_LT(g.grads.max_abs_diff(ref.grads), 1e-12) << "workers " << w;
            EXPECT_NEAR(g.loss, ref.loss, 1e-12);
        }
    }
}

TEST(ParallelGradient, WeightedMeanOfUnevenShards) {
    Rng rng(12);
    const auto net = init_network(make_arch(6, {4}, 10), rng);
    const auto batch = random_batch(rng, 5, 6, 10);
    auto expected = GradientSet::zeros_like(net);
    expected.add_scaled(shard_gradient(net, batch, 0, 3).grads, 3.0 / 5.0);
    expected.add_scaled(shard_gradient(net, batch, 3, 5).grads, 2.0 / 5.0);
    EXPECT_EQ(parallel_gradient(net, batch, 2).grads, expected);
}

TEST(ParallelGradient, EmptyBatch) {
    const auto net = zero_network(make_arch(6, {4}, 10));
    EXPECT_THROW(parallel_gradient(net, Batch{Matrix(0, 6), Matrix(0, 10)}, 2), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Training loop

DatasetSplit small_split(std::size_t n, std::uint64_t seed) {
    return split_dataset(generate_corpus(n, seed, OracleParams::defaults()), seed);
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.arch.hidden_sizes = {8, 8};
    cfg.epochs = 120;
    cfg.batch_tracks = 4;
    cfg.learning_rate = 3e-3;
    cfg.validation_every = 10;
    return cfg;
}

TEST(Train, HistoryIsFiniteAndLossDrops) {
    const auto data = small_split(20, 42);
    const auto cfg = small_config();
    std::size_t callbacks = 0;
    const auto result = train(cfg, data, [&](const HistoryEntry&) { ++callbacks; });
    ASSERT_EQ(result.history.size(), cfg.epochs);
    EXPECT_EQ(callbacks, 12u);
    for (const auto& h : result.history) {
        EXPECT_TRUE(std::isfinite(h.train_mse));
        if (h.val_mse) EXPECT_TRUE(std::isfinite(*h.val_mse));
    }
    // Compare the full training-split MSE at initialization and at the end.
    const auto prepared = prepare_tracks(data.training, result.checkpoint.normalizer);
    Rng init_rng = Rng(cfg.seed).child(0);
    const auto initial = init_network(cfg.arch, init_rng);
    const double before = batch_mse(initial, concat_tracks(prepared));
    EXPECT_LT(result.checkpoint.meta.final_train_mse, before);
}

TEST(Train, LearningRateSchedule) {
    const auto data = small_split(10, 1);
    auto cfg = small_config();
    cfg.epochs = 30;
    cfg.lr_decay = 0.9;
    const auto result = train(cfg, data);
    for (const auto& h : result.history) {
        EXPECT_EQ(h.lr, cfg.learning_rate * std::pow(0.9, static_cast<double>(h.epoch - 1)));
    }
    EXPECT_EQ(cfg.learning_rate_at(5), cfg.learning_rate * std::pow(0.9, 5.0));
}

TEST(Train, SelectsBestValidation) {
    const auto data = small_split(20, 2);
    auto cfg = small_config();
    cfg.learning_rate = 0.05;  // noisy on purpose
    const auto result = train(cfg, data);
    double best = INFINITY;
    for (const auto& h : result.history) {
        if (h.val_mse) best = std::min(best, *h.val_mse);
    }
    ASSERT_TRUE(result.selected_val_mse.has_value());
    EXPECT_EQ(*result.selected_val_mse, best);
    const auto val = prepare_tracks(data.validation, result.checkpoint.normalizer);
    EXPECT_EQ(batch_mse(result.checkpoint.net, concat_tracks(val)), best);
}

TEST(Train, ValidationDisabledKeepsFinalWeights) {
    const auto data = small_split(10, 3);
    auto cfg = small_config();
    cfg.epochs = 15;
    cfg.validation_every = 0;
    const auto result = train(cfg, data);
    EXPECT_EQ(result.selected_epoch, 15u);
    EXPECT_FALSE(result.selected_val_mse.has_value());
    for (const auto& h : result.history) EXPECT_FALSE(h.val_mse.has_value());
}

TEST(Train, WorkerCountDoesNotChangeTrajectory) {
    const auto data = small_split(12, 4);
    auto cfg = small_config();
    cfg.epochs = 40;
    cfg.validation_every = 0;
    cfg.workers = 1;
    const auto one = train(cfg, data);
    cfg.workers = 4;
    const auto four = train(cfg, data);
    const auto a = one.checkpoint.net, b = four.checkpoint.net;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        for (std::size_t i = 0; i < a.layers[k].weights.size(); ++i) {
            EXPECT_NEAR(a.layers[k].weights.values()[i], b.layers[k].weights.values()[i], 1e-9);
        }
    }
}

TEST(Train, RejectsBadConfig) {
    const auto data = small_split(10, 5);
    auto cfg = small_config();
    cfg.batch_tracks = 100;
    EXPECT_THROW(train(cfg, data), InvalidArgument);
    cfg = small_config();
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train(cfg, data), InvalidArgument);
    cfg = small_config();
    cfg.lr_decay = 1.5;
    EXPECT_THROW(train(cfg, data), InvalidArgument);
    cfg = small_config();
    cfg.workers = 0;
    EXPECT_THROW(train(cfg, data), InvalidArgument);
}

TEST(Train, NonFiniteLossNamesEpoch) {
    auto data = small_split(10, 6);
    for (auto& t : data.training) {
        for (auto& row : t.rows) row.surge.fill(1e200);
    }
    auto cfg = small_config();
    try {
        train(cfg, data);
        FAIL() << "expected TrainingDiverged";
    } catch (const TrainingDiverged& e) {
        EXPECT_EQ(e.epoch(), 1u);
        EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
    }
}

TEST(Train, HistoryCsv) {
    const auto path = std::filesystem::temp_directory_path() / "surgenet_history_test.csv";
    const std::vector<HistoryEntry> h{{1, 1e-3, 0.5, std::nullopt}, {2, 9e-4, 0.25, 0.125}};
    write_history_csv(h, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epoch,lr,train_mse,val_mse");
    std::getline(in, line);
    EXPECT_EQ(line, "1,0.001,0.5,");
    std::getline(in, line);
    EXPECT_EQ(line, "2,0.00089999999999999998,0.25,0.125");
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace surgenet
