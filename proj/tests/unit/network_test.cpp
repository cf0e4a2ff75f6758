#include <gtest/gtest.h>

#include <cmath>

#include "reference_net.hpp"
#include "surgenet/network.hpp"

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

Vector random_vector(Rng& rng, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = rng.uniform(-1.5, 1.5);
    return v;
}

TEST(ParamCount, DefaultArchitecture) {
    // 6*32+32 + 32*64+64 + 64*10+10
    EXPECT_EQ(param_count(make_arch(6, {32, 64}, 10)), 2986u);
    EXPECT_EQ(param_count(make_arch(1, {1}, 1)), 4u);
    EXPECT_EQ(param_count(make_arch(6, {200}, 10)), 6u * 200 + 200 + 200 * 10 + 10);
}

TEST(ParamCount, NeuronCeiling) {
    EXPECT_EQ(neuron_ceiling(62532), 125u);
    EXPECT_EQ(neuron_ceiling(400), 10u);
    EXPECT_EQ(neuron_ceiling(399), 9u);
    EXPECT_EQ(neuron_ceiling(0), 0u);
}

TEST(ParamCount, MatchesScalarsInParams) {
    Rng rng(4);
    for (auto arch : {make_arch(6, {32, 64}, 10), make_arch(3, {7}, 2), make_arch(8, {16, 2}, 12)}) {
        EXPECT_EQ(init_network(arch, rng).scalar_count(), param_count(arch));
    }
}

TEST(Architecture, Validation) {
    EXPECT_THROW(make_arch(6, {}, 10).validate(), InvalidArgument);
    EXPECT_THROW(make_arch(6, {4, 4, 4}, 10).validate(), InvalidArgument);
    EXPECT_THROW(make_arch(0, {4}, 10).validate(), InvalidArgument);
    EXPECT_THROW(make_arch(6, {0}, 10).validate(), InvalidArgument);
    EXPECT_EQ(make_arch(6, {32, 64}, 10).label(), "(32,64)");
    EXPECT_EQ(make_arch(6, {60}, 10).label(), "(60,-)");
}

TEST(Architecture, ParseHiddenSizes) {
    EXPECT_EQ(parse_hidden_sizes("32,64"), (std::vector<std::size_t>{32, 64}));
    EXPECT_EQ(parse_hidden_sizes("200"), (std::vector<std::size_t>{200}));
    EXPECT_THROW(parse_hidden_sizes(""), InvalidArgument);
    EXPECT_THROW(parse_hidden_sizes("32,"), InvalidArgument);
    EXPECT_THROW(parse_hidden_sizes("1,2,3"), InvalidArgument);
    EXPECT_THROW(parse_hidden_sizes("x"), InvalidArgument);
    EXPECT_THROW(parse_hidden_sizes("0"), InvalidArgument);
    EXPECT_EQ(parse_activation("sigmoid"), Activation::sigmoid);
    EXPECT_THROW(parse_activation("relu"), InvalidArgument);
}

TEST(InitNetwork, DeterministicWithZeroBiases) {
    const auto arch = make_arch(6, {32, 64}, 10);
    Rng a(123), b(123);
    const auto na = init_network(arch, a);
    const auto nb = init_network(arch, b);
    EXPECT_EQ(na, nb);
    for (const auto& l : na.layers) {
        for (double v : l.bias) EXPECT_EQ(v, 0.0);
    }
    EXPECT_NO_THROW(na.validate());
}

TEST(InitNetwork, WeightScaleFollowsFanIn) {
    const auto arch = make_arch(64, {128}, 10);
    Rng rng(9);
    const auto net = init_network(arch, rng);
    double sq = 0.0;
    for (double v : net.layers[0].weights.values()) sq += v * v;
    const double sd = std::sqrt(sq / static_cast<double>(net.layers[0].weights.size()));
    EXPECT_NEAR(sd, 1.0 / 8.0, 0.01);
}

TEST(Forward, ZeroNetwork) {
    for (auto act : {Activation::tanh, Activation::sigmoid}) {
        const auto net = zero_network(make_arch(6, {4, 5}, 10, act));
        const auto r = forward(net, Vector(6, 0.7));
        EXPECT_EQ(r.output, Vector(10, 0.0));
        ASSERT_EQ(r.hidden.size(), 2u);
        const double s0 = act == Activation::tanh ? 0.0 : 0.5;
        EXPECT_EQ(r.hidden[0], Vector(4, s0));
        EXPECT_EQ(r.hidden[1], Vector(5, s0));
    }
}

TEST(Forward, ZeroPreActivationYieldsOutputBias) {
    auto net = zero_network(make_arch(6, {4}, 10));
    Rng rng(2);
    for (double& w : net.layers[1].weights.values()) w = rng.uniform(-1.0, 1.0);
    for (double& b : net.layers[1].bias) b = rng.uniform(-1.0, 1.0);
    const auto r = forward(net, random_vector(rng, 6));
    EXPECT_EQ(r.hidden[0], Vector(4, 0.0));
    EXPECT_EQ(r.output, net.layers[1].bias);
}

TEST(Forward, MatchesReferenceImplementation) {
    Rng rng(31);
    for (auto hidden : {std::vector<std::size_t>{4}, std::vector<std::size_t>{4, 7}}) {
        for (auto act : {Activation::tanh, Activation::sigmoid}) {
            const auto net = init_network(make_arch(6, hidden, 10, act), rng);
            for (int trial = 0; trial < 20; ++trial) {
                const auto x = random_vector(rng, 6);
                const auto y = forward(net, x).output;
                const auto ref = test::reference_forward(net, x);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    EXPECT_NEAR(y[i], static_cast<double>(ref[i]), 1e-14);
                }
            }
        }
    }
}

TEST(Forward, ThreeLayerIsComposedAffineSteps) {
    Rng rng(5);
    const auto net = init_network(make_arch(6, {8, 9}, 10), rng);
    const auto x = random_vector(rng, 6);
    const auto h1 = tanh_act(affine(net.layers[0].weights, x, net.layers[0].bias));
    const auto h2 = tanh_act(affine(net.layers[1].weights, h1, net.layers[1].bias));
    const auto y = affine(net.layers[2].weights, h2, net.layers[2].bias);
    const auto r = forward(net, x);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(r.output[i], y[i], 1e-14);
    EXPECT_EQ(r.hidden[0], h1);
    EXPECT_EQ(r.hidden[1], h2);
}

TEST(Forward, OutputIsLinearInOutputLayer) {
    Rng rng(8);
    auto a = init_network(make_arch(6, {5}, 3), rng);
    auto b = a;
    for (double& w : b.layers[1].weights.values()) w = rng.uniform(-1.0, 1.0);
    for (double& v : b.layers[1].bias) v = rng.uniform(-1.0, 1.0);
    auto mix = a;
    const double s = 0.3, t = -1.7;
    for (std::size_t i = 0; i < mix.layers[1].weights.size(); ++i) {
        mix.layers[1].weights.values()[i] =
            s * a.layers[1].weights.values()[i] + t * b.layers[1].weights.values()[i];
    }
    for (std::size_t i = 0; i < mix.layers[1].bias.size(); ++i) {
        mix.layers[1].bias[i] = s * a.layers[1].bias[i] + t * b.layers[1].bias[i];
    }
    const auto x = random_vector(rng, 6);
    const auto ya = forward(a, x).output, yb = forward(b, x).output, ym = forward(mix, x).output;
    for (std::size_t i = 0; i < ym.size(); ++i) EXPECT_NEAR(ym[i], s * ya[i] + t * yb[i], 1e-12);
}

TEST(Forward, BatchAgreesWithSingle) {
    Rng rng(12);
    const auto net = init_network(make_arch(6, {32, 64}, 10), rng);
    Matrix inputs(17, 6);
    for (double& v : inputs.values()) v = rng.uniform(-2.0, 2.0);
    const auto batch = forward_batch(net, inputs);
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        const auto y = forward(net, inputs.row(r)).output;
        for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(batch(r, i), y[i], 1e-13);
    }
}

TEST(Forward, DimensionMismatch) {
    const auto net = zero_network(make_arch(6, {4}, 10));
    EXPECT_THROW(forward(net, Vector(5, 0.0)), InvalidArgument);
    EXPECT_THROW(forward_batch(net, Matrix(3, 7)), InvalidArgument);
}

TEST(NetworkParams, ValidateCatchesShapeAndNonFinite) {
    auto net = zero_network(make_arch(6, {4}, 10));
    net.layers[0].bias.push_back(0.0);
    EXPECT_THROW(net.validate(), InvalidArgument);
    net = zero_network(make_arch(6, {4}, 10));
    net.layers[1].weights(0, 0) = std::nan("");
    EXPECT_THROW(net.validate(), InvalidArgument);
}

}  // namespace
}  // namespace surgenet
