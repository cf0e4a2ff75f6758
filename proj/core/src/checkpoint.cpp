#include "surgenet/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace surgenet {

CheckpointVersionError::CheckpointVersionError(int found, int expected)
    : CheckpointError("checkpoint format version " + std::to_string(found) +
                      " is not supported (this build reads version " +
                      std::to_string(expected) + ")"),
      found_(found),
      expected_(expected) {}

namespace {

void put_real(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out += ' ';
    out.append(buf, static_cast<std::size_t>(n));
}

void put_reals(std::string& out, std::string_view key, std::span<const double> values) {
    out += key;
    out += ' ';
    out += std::to_string(values.size());
    for (double v : values) put_real(out, v);
    out += '\n';
}

class TokenReader {
public:
    explicit TokenReader(const std::string& text) : text_(text) {}

    std::string_view next(std::string_view what) {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) {
            throw CheckpointParseError("checkpoint truncated: expected " + std::string(what));
        }
        const auto start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return std::string_view(text_).substr(start, pos_ - start);
    }

    void expect(std::string_view key) {
        const auto token = next("'" + std::string(key) + "'");
        if (token != key) {
            throw CheckpointParseError("checkpoint: expected '" + std::string(key) + "', found '" +
                                       std::string(token) + "'");
        }
    }

    template <typename Int>
    Int integer(std::string_view what) {
        const auto token = next(what);
        Int value{};
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            throw CheckpointParseError("checkpoint: invalid " + std::string(what) + " '" +
                                       std::string(token) + "'");
        }
        return value;
    }

    double real(std::string_view what) {
        const auto token = next(what);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            throw CheckpointParseError("checkpoint: invalid " + std::string(what) + " '" +
                                       std::string(token) + "'");
        }
        if (!std::isfinite(value)) {
            throw CheckpointParseError("checkpoint: non-finite " + std::string(what));
        }
        return value;
    }

    Vector reals(std::string_view key, std::size_t expected_count) {
        expect(key);
        const auto n = integer<std::size_t>(std::string(key) + " count");
        if (n != expected_count) {
            throw CheckpointDimensionError("checkpoint: " + std::string(key) + " has " +
                                           std::to_string(n) + " values, expected " +
                                           std::to_string(expected_count));
        }
        Vector v(n);
        for (auto& x : v) x = real(key);
        return v;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
    std::string out = "surgenet-checkpoint\n";
    out += "format_version " + std::to_string(c.format_version) + "\n";
    const auto& arch = c.net.arch;
    out += "activation " + std::string(to_string(arch.activation)) + "\n";
    out += "input_dim " + std::to_string(arch.input_dim) + "\n";
    out += "hidden_sizes " + std::to_string(arch.hidden_sizes.size());
    for (auto h : arch.hidden_sizes) out += " " + std::to_string(h);
    out += "\noutput_dim " + std::to_string(arch.output_dim) + "\n";
    out += "seed " + std::to_string(c.meta.seed) + "\n";
    out += "epochs_trained " + std::to_string(c.meta.epochs_trained) + "\n";
    out += "final_train_mse";
    put_real(out, c.meta.final_train_mse);
    out += '\n';
    put_reals(out, "normalizer_means", c.normalizer.means);
    put_reals(out, "normalizer_stds", c.normalizer.stds);
    out += "normalizer_constant " + std::to_string(c.normalizer.constant.size());
    for (bool flag : c.normalizer.constant) out += flag ? " 1" : " 0";
    out += '\n';
    for (std::size_t k = 0; k < c.net.layers.size(); ++k) {
        const auto& w = c.net.layers[k].weights;
        out += "layer " + std::to_string(k) + " weights " + std::to_string(w.rows()) + " " +
               std::to_string(w.cols()) + "\n";
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (double v : w.row(r)) put_real(out, v);
            out += '\n';
        }
        put_reals(out, "bias", c.net.layers[k].bias);
    }
    out += "end\n";
    return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
    TokenReader in(text);
    const auto magic = in.next("header");
    if (magic != "surgenet-checkpoint") {
        throw CheckpointParseError("not a checkpoint file (missing 'surgenet-checkpoint' header)");
    }
    Checkpoint c;
    in.expect("format_version");
    c.format_version = in.integer<int>("format_version");
    if (c.format_version != kCheckpointFormatVersion) {
        throw CheckpointVersionError(c.format_version, kCheckpointFormatVersion);
    }

    auto& arch = c.net.arch;
    in.expect("activation");
    try {
        arch.activation = parse_activation(in.next("activation"));
    } catch (const InvalidArgument& e) {
        throw CheckpointParseError(std::string("checkpoint: ") + e.what());
    }
    in.expect("input_dim");
    arch.input_dim = in.integer<std::size_t>("input_dim");
    in.expect("hidden_sizes");
    const auto n_hidden = in.integer<std::size_t>("hidden layer count");
    if (n_hidden < 1 || n_hidden > 2) {
        throw CheckpointDimensionError("checkpoint: " + std::to_string(n_hidden) +
                                       " hidden layers declared, expected 1 or 2");
    }
    arch.hidden_sizes.assign(n_hidden, 0);
    for (auto& h : arch.hidden_sizes) h = in.integer<std::size_t>("hidden size");
    in.expect("output_dim");
    arch.output_dim = in.integer<std::size_t>("output_dim");
    try {
        arch.validate();
    } catch (const InvalidArgument& e) {
        throw CheckpointDimensionError(std::string("checkpoint: ") + e.what());
    }

    in.expect("seed");
    c.meta.seed = in.integer<std::uint64_t>("seed");
    in.expect("epochs_trained");
    c.meta.epochs_trained = in.integer<std::uint64_t>("epochs_trained");
    in.expect("final_train_mse");
    c.meta.final_train_mse = in.real("final_train_mse");

    c.normalizer.means = in.reals("normalizer_means", arch.input_dim);
    c.normalizer.stds = in.reals("normalizer_stds", arch.input_dim);
    in.expect("normalizer_constant");
    const auto n_flags = in.integer<std::size_t>("normalizer_constant count");
    if (n_flags != arch.input_dim) {
        throw CheckpointDimensionError("checkpoint: normalizer_constant has " +
                                       std::to_string(n_flags) + " flags, expected " +
                                       std::to_string(arch.input_dim));
    }
    for (std::size_t i = 0; i < n_flags; ++i) {
        const auto flag = in.integer<int>("constant flag");
        if (flag != 0 && flag != 1) throw CheckpointParseError("checkpoint: constant flag not 0/1");
        c.normalizer.constant.push_back(flag == 1);
    }
    try {
        c.normalizer.validate();
    } catch (const InvalidArgument& e) {
        throw CheckpointParseError(std::string("checkpoint: ") + e.what());
    }

    const auto expected = zero_network(arch);
    for (std::size_t k = 0; k < expected.layers.size(); ++k) {
        const auto& shape = expected.layers[k].weights;
        in.expect("layer");
        const auto index = in.integer<std::size_t>("layer index");
        if (index != k) {
            throw CheckpointParseError("checkpoint: layer " + std::to_string(index) +
                                       " out of order (expected " + std::to_string(k) + ")");
        }
        in.expect("weights");
        const auto rows = in.integer<std::size_t>("weight rows");
        const auto cols = in.integer<std::size_t>("weight cols");
        if (rows != shape.rows() || cols != shape.cols()) {
            throw CheckpointDimensionError(
                "checkpoint: layer " + std::to_string(k) + " weights are " +
                shape_string(rows, cols) + ", architecture " + arch.label() + " needs " +
                shape_string(shape.rows(), shape.cols()));
        }
        Matrix w(rows, cols);
        for (double& v : w.values()) v = in.real("weight");
        auto b = in.reals("bias", rows);
        c.net.layers.push_back({std::move(w), std::move(b)});
    }
    in.expect("end");
    return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    const auto text = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointIoError("cannot write checkpoint '" + path.string() + "'");
    out << text;
    if (!out) throw CheckpointIoError("write failed for checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointIoError("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_checkpoint(buffer.str());
}

}  // namespace surgenet
