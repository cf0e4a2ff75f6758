#include "surgenet/network.hpp"

#include <charconv>
#include <cmath>

namespace surgenet {

std::string_view to_string(Activation a) noexcept {
    return a == Activation::tanh ? "tanh" : "sigmoid";
}

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw InvalidArgument("unknown activation '" + std::string(name) +
                          "' (expected tanh or sigmoid)");
}

void Architecture::validate() const {
    if (input_dim < 1 || output_dim < 1) {
        throw InvalidArgument("architecture: input and output dims must be >= 1");
    }
    if (hidden_sizes.empty() || hidden_sizes.size() > 2) {
        throw InvalidArgument("architecture: expected 1 or 2 hidden layers, got " +
                              std::to_string(hidden_sizes.size()));
    }
    for (auto h : hidden_sizes) {
        if (h < 1) throw InvalidArgument("architecture: hidden sizes must be >= 1");
    }
}

std::string Architecture::label() const {
    std::string s = "(" + std::to_string(hidden_sizes.at(0)) + ",";
    s += hidden_sizes.size() > 1 ? std::to_string(hidden_sizes[1]) : "-";
    return s + ")";
}

std::vector<std::size_t> parse_hidden_sizes(std::string_view text) {
    std::vector<std::size_t> sizes;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        const auto token = text.substr(pos, end - pos);
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || value == 0) {
            throw InvalidArgument("invalid hidden layer text '" + std::string(text) +
                                  "' (expected N1 or N1,N2)");
        }
        sizes.push_back(value);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (sizes.size() > 2) {
        throw InvalidArgument("invalid hidden layer text '" + std::string(text) +
                              "': at most two hidden layers");
    }
    return sizes;
}

namespace {

std::vector<std::size_t> dimension_chain(const Architecture& arch) {
    std::vector<std::size_t> dims{arch.input_dim};
    dims.insert(dims.end(), arch.hidden_sizes.begin(), arch.hidden_sizes.end());
    dims.push_back(arch.output_dim);
    return dims;
}

}  // namespace

void NetworkParams::validate() const {
    arch.validate();
    const auto dims = dimension_chain(arch);
    if (layers.size() != dims.size() - 1) {
        throw InvalidArgument("network: expected " + std::to_string(dims.size() - 1) +
                              " layers, got " + std::to_string(layers.size()));
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.weights.rows() != dims[k + 1] || l.weights.cols() != dims[k] ||
            l.bias.size() != dims[k + 1]) {
            throw InvalidArgument("network: layer " + std::to_string(k) + " has weights " +
                                  shape_string(l.weights.rows(), l.weights.cols()) + " and bias " +
                                  std::to_string(l.bias.size()) + ", expected " +
                                  shape_string(dims[k + 1], dims[k]));
        }
        for (double v : l.weights.values()) {
            if (!std::isfinite(v)) throw InvalidArgument("network: non-finite weight");
        }
        for (double v : l.bias) {
            if (!std::isfinite(v)) throw InvalidArgument("network: non-finite bias");
        }
    }
}

std::size_t NetworkParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

NetworkParams zero_network(const Architecture& arch) {
    arch.validate();
    NetworkParams net{arch, {}};
    const auto dims = dimension_chain(arch);
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        net.layers.push_back({Matrix(dims[k + 1], dims[k]), Vector(dims[k + 1], 0.0)});
    }
    return net;
}

NetworkParams init_network(const Architecture& arch, Rng& rng) {
    auto net = zero_network(arch);
    for (auto& layer : net.layers) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
        for (double& w : layer.weights.values()) w = normal_sample(rng, 0.0, scale);
    }
    return net;
}

namespace detail {

void activate(Activation a, std::span<double> values) {
    if (a == Activation::tanh) {
        for (double& v : values) v = std::tanh(v);
    } else {
        for (double& v : values) v = 1.0 / (1.0 + std::exp(-v));
    }
}

void scale_by_derivative(Activation a, std::span<const double> act, std::span<double> grad) {
    if (a == Activation::tanh) {
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - act[i] * act[i];
    } else {
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= act[i] * (1.0 - act[i]);
    }
}

void affine_rows(const Layer& layer, const Matrix& in, Matrix& out) {
    const std::size_t fan_out = layer.weights.rows();
    const std::size_t fan_in = layer.weights.cols();
    if (out.rows() != in.rows() || out.cols() != fan_out) out = Matrix(in.rows(), fan_out);
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const double* x = in.row(r).data();
        double* y = out.row(r).data();
        for (std::size_t o = 0; o < fan_out; ++o) {
            const double* w = layer.weights.row(o).data();
            double acc = 0.0;
            for (std::size_t i = 0; i < fan_in; ++i) acc += w[i] * x[i];
            y[o] = acc + layer.bias[o];
        }
    }
}

}  // namespace detail

ForwardResult forward(const NetworkParams& net, std::span<const double> x) {
    if (x.size() != net.arch.input_dim) {
        throw InvalidArgument("forward: input length " + std::to_string(x.size()) +
                              " does not match input_dim " + std::to_string(net.arch.input_dim));
    }
    ForwardResult result;
    Vector current(x.begin(), x.end());
    for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) {
        current = affine(net.layers[k].weights, current, net.layers[k].bias);
        detail::activate(net.arch.activation, current);
        result.hidden.push_back(current);
    }
    result.output = affine(net.layers.back().weights, current, net.layers.back().bias);
    return result;
}

Matrix forward_batch(const NetworkParams& net, const Matrix& inputs) {
    if (inputs.cols() != net.arch.input_dim) {
        throw InvalidArgument("forward_batch: input width " + std::to_string(inputs.cols()) +
                              " does not match input_dim " + std::to_string(net.arch.input_dim));
    }
    Matrix current = inputs;
    Matrix next;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        detail::affine_rows(net.layers[k], current, next);
        if (k + 1 < net.layers.size()) detail::activate(net.arch.activation, next.values());
        std::swap(current, next);
    }
    return current;
}

std::size_t param_count(const Architecture& arch) {
    arch.validate();
    const auto dims = dimension_chain(arch);
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) n += dims[k + 1] * dims[k] + dims[k + 1];
    return n;
}

std::size_t neuron_ceiling(std::size_t samples) {
    auto n = static_cast<std::size_t>(std::sqrt(static_cast<double>(samples) / 4.0));
    // Guard against sqrt rounding at perfect squares.
    while ((n + 1) * (n + 1) * 4 <= samples) ++n;
    while (n > 0 && n * n * 4 > samples) --n;
    return n;
}

}  // namespace surgenet
