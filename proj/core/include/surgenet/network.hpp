#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgenet/numerics.hpp"
#include "surgenet/rng.hpp"

namespace surgenet {

enum class Activation { tanh, sigmoid };

std::string_view to_string(Activation a) noexcept;
/// Parses "tanh" or "sigmoid"; throws InvalidArgument otherwise.
Activation parse_activation(std::string_view name);

/// Layer sizes of a feedforward net with one or two hidden layers and a
/// linear output layer.
struct Architecture {
    std::size_t input_dim = 6;
    std::vector<std::size_t> hidden_sizes{32, 64};
    std::size_t output_dim = 10;
    Activation activation = Activation::tanh;

    void validate() const;
    /// "(32,64)" / "(60,-)" style label.
    std::string label() const;

    bool operator==(const Architecture&) const = default;
};

/// Parses "N1" or "N1,N2".
std::vector<std::size_t> parse_hidden_sizes(std::string_view text);

struct Layer {
    Matrix weights;  // fan_out x fan_in
    Vector bias;     // fan_out

    bool operator==(const Layer&) const = default;
};

/// Weights and biases for every hidden layer followed by the output layer.
struct NetworkParams {
    Architecture arch;
    std::vector<Layer> layers;

    /// Throws InvalidArgument when layer shapes do not chain per `arch`
    /// or any entry is non-finite.
    void validate() const;
    std::size_t scalar_count() const;

    bool operator==(const NetworkParams&) const = default;
};

/// Weights ~ Normal(0, 1/sqrt(fan_in)), biases zero.
NetworkParams init_network(const Architecture& arch, Rng& rng);

NetworkParams zero_network(const Architecture& arch);

struct ForwardResult {
    Vector output;
    std::vector<Vector> hidden;
};

/// Single-sample inference; `x` must already be normalized.
ForwardResult forward(const NetworkParams& net, std::span<const double> x);

/// Batched inference: one sample per row of `inputs`, returns rows x output_dim.
Matrix forward_batch(const NetworkParams& net, const Matrix& inputs);

std::size_t param_count(const Architecture& arch);

/// Largest neuron count N with N^2 free parameters at a 4:1 samples-to-parameters
/// ratio, i.e. floor(sqrt(samples / 4)).
std::size_t neuron_ceiling(std::size_t samples);

namespace detail {
/// In-place activation over a buffer.
void activate(Activation a, std::span<double> values);
/// Multiplies `grad` by the activation derivative expressed through the
/// activated value `act`.
void scale_by_derivative(Activation a, std::span<const double> act, std::span<double> grad);
/// out(rows x W.rows) = in(rows x W.cols) * W^T + b, broadcast over rows.
void affine_rows(const Layer& layer, const Matrix& in, Matrix& out);
}  // namespace detail

}  // namespace surgenet
