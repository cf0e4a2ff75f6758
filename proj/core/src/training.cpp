#include "surgenet/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace surgenet {

GradientSet GradientSet::zeros_like(const NetworkParams& net) {
    GradientSet g;
    for (const auto& l : net.layers) {
        g.layers.push_back({Matrix(l.weights.rows(), l.weights.cols()), Vector(l.bias.size(), 0.0)});
    }
    return g;
}

void GradientSet::add_scaled(const GradientSet& other, double scale) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        auto dst = layers[k].weights.values();
        const auto src = other.layers[k].weights.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
        auto& db = layers[k].bias;
        const auto& sb = other.layers[k].bias;
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += scale * sb[i];
    }
}

double GradientSet::max_abs_diff(const GradientSet& other) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto a = layers[k].weights.values();
        const auto b = other.layers[k].weights.values();
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        for (std::size_t i = 0; i < layers[k].bias.size(); ++i) {
            worst = std::max(worst, std::abs(layers[k].bias[i] - other.layers[k].bias[i]));
        }
    }
    return worst;
}

bool GradientSet::all_finite() const {
    for (const auto& l : layers) {
        for (double v : l.weights.values()) {
            if (!std::isfinite(v)) return false;
        }
        for (double v : l.bias) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

namespace {

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    }
    return t;
}

/// out = in * W^T + b using the transposed weights, so the inner loop runs
/// contiguously over output units.
void affine_rows_t(const Matrix& weights_t, const Vector& bias, const Matrix& in, Matrix& out) {
    const std::size_t fan_in = weights_t.rows();
    const std::size_t fan_out = weights_t.cols();
    out = Matrix(in.rows(), fan_out);
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const double* x = in.row(r).data();
        double* __restrict y = out.row(r).data();
        for (std::size_t o = 0; o < fan_out; ++o) y[o] = bias[o];
        for (std::size_t i = 0; i < fan_in; ++i) {
            const double xi = x[i];
            const double* __restrict w = weights_t.row(i).data();
            for (std::size_t o = 0; o < fan_out; ++o) y[o] += xi * w[o];
        }
    }
}

LossGradient shard_gradient_t(const NetworkParams& net, std::span<const Matrix> weights_t,
                              const Batch& batch, std::size_t begin, std::size_t end) {
    if (begin >= end || end > batch.rows()) {
        throw InvalidArgument("shard_gradient: invalid row range [" + std::to_string(begin) + ", " +
                              std::to_string(end) + ") for batch of " +
                              std::to_string(batch.rows()));
    }
    if (batch.inputs.cols() != net.arch.input_dim || batch.targets.cols() != net.arch.output_dim ||
        batch.targets.rows() != batch.inputs.rows()) {
        throw InvalidArgument("shard_gradient: batch shape " +
                              shape_string(batch.inputs.rows(), batch.inputs.cols()) + " / " +
                              shape_string(batch.targets.rows(), batch.targets.cols()) +
                              " does not match network " + net.arch.label());
    }
    const std::size_t n = end - begin;
    const std::size_t n_layers = net.layers.size();
    const auto act = net.arch.activation;

    // acts[0] is the input slice, acts[k] the output of layer k-1.
    std::vector<Matrix> acts(n_layers + 1);
    acts[0] = Matrix(n, batch.inputs.cols());
    for (std::size_t r = 0; r < n; ++r) {
        const auto src = batch.inputs.row(begin + r);
        std::copy(src.begin(), src.end(), acts[0].row(r).begin());
    }
    for (std::size_t k = 0; k < n_layers; ++k) {
        affine_rows_t(weights_t[k], net.layers[k].bias, acts[k], acts[k + 1]);
        if (k + 1 < n_layers) detail::activate(act, acts[k + 1].values());
    }

    const double k_out = static_cast<double>(net.arch.output_dim);
    const double scale = 2.0 / (k_out * static_cast<double>(n));
    Matrix delta = std::move(acts[n_layers]);
    double sq_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        auto d = delta.row(r);
        const auto t = batch.targets.row(begin + r);
        for (std::size_t o = 0; o < d.size(); ++o) {
            const double e = d[o] - t[o];
            sq_sum += e * e;
            d[o] = scale * e;
        }
    }

    LossGradient result{sq_sum / (k_out * static_cast<double>(n)), GradientSet::zeros_like(net)};
    for (std::size_t k = n_layers; k-- > 0;) {
        const Matrix& a = acts[k];
        const std::size_t fan_in = a.cols();
        const std::size_t fan_out = delta.cols();
        // Accumulate dW^T so the inner loop is contiguous over output units.
        Matrix dw_t(fan_in, fan_out);
        auto& db = result.grads.layers[k].bias;
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r).data();
            const double* x = a.row(r).data();
            for (std::size_t o = 0; o < fan_out; ++o) db[o] += d[o];
            for (std::size_t i = 0; i < fan_in; ++i) {
                const double xi = x[i];
                double* __restrict g = dw_t.row(i).data();
                for (std::size_t o = 0; o < fan_out; ++o) g[o] += xi * d[o];
            }
        }
        auto& dw = result.grads.layers[k].weights;
        for (std::size_t i = 0; i < fan_in; ++i) {
            for (std::size_t o = 0; o < fan_out; ++o) dw(o, i) = dw_t(i, o);
        }
        if (k == 0) break;

        // delta_prev = (delta * W) .* act'(a)
        const Matrix& w = net.layers[k].weights;
        Matrix prev(n, fan_in);
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r).data();
            double* __restrict p = prev.row(r).data();
            for (std::size_t o = 0; o < fan_out; ++o) {
                const double dv = d[o];
                const double* __restrict wr = w.row(o).data();
                for (std::size_t i = 0; i < fan_in; ++i) p[i] += dv * wr[i];
            }
        }
        detail::scale_by_derivative(act, a.values(), prev.values());
        delta = std::move(prev);
    }
    return result;
}

std::vector<Matrix> transposed_weights(const NetworkParams& net) {
    std::vector<Matrix> t;
    t.reserve(net.layers.size());
    for (const auto& l : net.layers) t.push_back(transpose(l.weights));
    return t;
}

}  // namespace

LossGradient shard_gradient(const NetworkParams& net, const Batch& batch, std::size_t begin,
                            std::size_t end) {
    const auto wt = transposed_weights(net);
    return shard_gradient_t(net, wt, batch, begin, end);
}

LossGradient backprop(const NetworkParams& net, std::span<const double> x,
                      std::span<const double> target) {
    if (x.size() != net.arch.input_dim || target.size() != net.arch.output_dim) {
        throw InvalidArgument("backprop: input/target lengths " + std::to_string(x.size()) + "/" +
                              std::to_string(target.size()) + " do not match network " +
                              std::to_string(net.arch.input_dim) + "/" +
                              std::to_string(net.arch.output_dim));
    }
    Batch one{Matrix(1, x.size(), Vector(x.begin(), x.end())),
              Matrix(1, target.size(), Vector(target.begin(), target.end()))};
    return shard_gradient(net, one, 0, 1);
}

std::vector<std::pair<std::size_t, std::size_t>> shard_bounds(std::size_t rows,
                                                              std::size_t workers) {
    if (workers == 0) throw InvalidArgument("shard_bounds: workers must be >= 1");
    const std::size_t shards = std::min(rows, workers);
    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    std::size_t start = 0;
    for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t len = rows / shards + (s < rows % shards ? 1 : 0);
        bounds.emplace_back(start, start + len);
        start += len;
    }
    return bounds;
}

LossGradient parallel_gradient(const NetworkParams& net, const Batch& batch, std::size_t workers) {
    if (batch.rows() == 0) throw InvalidArgument("parallel_gradient: empty batch");
    const auto bounds = shard_bounds(batch.rows(), workers);
    const auto wt = transposed_weights(net);

    std::vector<LossGradient> shard_results(bounds.size());
    {
        std::vector<std::jthread> threads;
        std::vector<std::exception_ptr> errors(bounds.size());
        for (std::size_t s = 1; s < bounds.size(); ++s) {
            threads.emplace_back([&, s] {
                try {
                    shard_results[s] =
                        shard_gradient_t(net, wt, batch, bounds[s].first, bounds[s].second);
                } catch (...) {
                    errors[s] = std::current_exception();
                }
            });
        }
        try {
            shard_results[0] = shard_gradient_t(net, wt, batch, bounds[0].first, bounds[0].second);
        } catch (...) {
            errors[0] = std::current_exception();
        }
        for (auto& t : threads) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    // Ordered reduction keeps the result independent of thread scheduling.
    LossGradient total{0.0, GradientSet::zeros_like(net)};
    const double n = static_cast<double>(batch.rows());
    for (std::size_t s = 0; s < bounds.size(); ++s) {
        const double weight = static_cast<double>(bounds[s].second - bounds[s].first) / n;
        total.loss += weight * shard_results[s].loss;
        total.grads.add_scaled(shard_results[s].grads, weight);
    }
    return total;
}

void AdamConfig::validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("adam: betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw InvalidArgument("adam: epsilon must be > 0");
}

AdamState AdamState::zeros_like(const NetworkParams& net) {
    return {GradientSet::zeros_like(net), GradientSet::zeros_like(net), 0};
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::uint64_t t, double lr, const AdamConfig& cfg) {
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        first_moment[i] = cfg.beta1 * first_moment[i] + (1.0 - cfg.beta1) * g;
        second_moment[i] = cfg.beta2 * second_moment[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = first_moment[i] / bias1;
        const double v_hat = second_moment[i] / bias2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void adam_step(NetworkParams& net, const GradientSet& grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
    if (grads.layers.size() != net.layers.size() ||
        state.first_moment.layers.size() != net.layers.size()) {
        throw InvalidArgument("adam_step: gradient/state shapes do not match the network");
    }
    ++state.step;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        auto& layer = net.layers[k];
        adam_update(layer.weights.values(), grads.layers[k].weights.values(),
                    state.first_moment.layers[k].weights.values(),
                    state.second_moment.layers[k].weights.values(), state.step, lr, cfg);
        adam_update(layer.bias, grads.layers[k].bias, state.first_moment.layers[k].bias,
                    state.second_moment.layers[k].bias, state.step, lr, cfg);
    }
}

std::vector<PreparedTrack> prepare_tracks(std::span<const StormTrack> tracks,
                                          const Normalizer& normalizer) {
    std::vector<PreparedTrack> prepared;
    prepared.reserve(tracks.size());
    for (const auto& t : tracks) {
        PreparedTrack p{t.input_matrix(), t.surge_matrix()};
        normalizer.apply_rows(p.inputs);
        prepared.push_back(std::move(p));
    }
    return prepared;
}

namespace {

Batch gather(std::span<const PreparedTrack> tracks, std::span<const std::size_t> picks) {
    std::size_t rows = 0;
    for (auto i : picks) rows += tracks[i].inputs.rows();
    const std::size_t in_cols = tracks.empty() ? 0 : tracks[0].inputs.cols();
    const std::size_t out_cols = tracks.empty() ? 0 : tracks[0].targets.cols();
    Batch b{Matrix(rows, in_cols), Matrix(rows, out_cols)};
    std::size_t r = 0;
    for (auto i : picks) {
        const auto& t = tracks[i];
        std::copy(t.inputs.values().begin(), t.inputs.values().end(),
                  b.inputs.values().begin() + static_cast<std::ptrdiff_t>(r * in_cols));
        std::copy(t.targets.values().begin(), t.targets.values().end(),
                  b.targets.values().begin() + static_cast<std::ptrdiff_t>(r * out_cols));
        r += t.inputs.rows();
    }
    return b;
}

}  // namespace

Batch sample_batch(Rng& rng, std::span<const PreparedTrack> tracks, std::size_t batch_tracks) {
    if (batch_tracks == 0) throw InvalidArgument("sample_batch: batch_tracks must be >= 1");
    if (batch_tracks > tracks.size()) {
        throw InvalidArgument("sample_batch: batch of " + std::to_string(batch_tracks) +
                              " tracks exceeds the " + std::to_string(tracks.size()) +
                              " available training tracks");
    }
    // Partial Fisher-Yates: the first batch_tracks slots are a uniform sample.
    std::vector<std::size_t> order(tracks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < batch_tracks; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
    }
    return gather(tracks, std::span<const std::size_t>(order).first(batch_tracks));
}

Batch concat_tracks(std::span<const PreparedTrack> tracks) {
    std::vector<std::size_t> all(tracks.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return gather(tracks, all);
}

double batch_mse(const NetworkParams& net, const Batch& batch) {
    if (batch.rows() == 0) throw InvalidArgument("batch_mse: empty batch");
    const Matrix pred = forward_batch(net, batch.inputs);
    double sum = 0.0;
    const auto p = pred.values();
    const auto t = batch.targets.values();
    for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] - t[i]) * (p[i] - t[i]);
    return sum / static_cast<double>(p.size());
}

void TrainConfig::validate() const {
    arch.validate();
    if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
    if (batch_tracks < 1) throw InvalidArgument("train: batch_tracks must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
        throw InvalidArgument("train: lr_decay must lie in (0, 1]");
    }
    if (workers < 1) throw InvalidArgument("train: workers must be >= 1");
    adam.validate();
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
    return learning_rate * std::pow(lr_decay, static_cast<double>(epoch));
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                         ": non-finite loss " + std::to_string(loss)),
      epoch_(epoch) {}

TrainResult train(const TrainConfig& cfg, const DatasetSplit& data,
                  const ProgressCallback& on_validation) {
    cfg.validate();
    if (data.training.empty()) throw InvalidArgument("train: training split is empty");
    if (cfg.arch.input_dim != kInputColumns || cfg.arch.output_dim != kOutputColumns) {
        throw InvalidArgument("train: architecture must map " + std::to_string(kInputColumns) +
                              " inputs to " + std::to_string(kOutputColumns) + " outputs");
    }

    const Normalizer normalizer = fit_normalizer(data.training);
    const auto train_tracks = prepare_tracks(data.training, normalizer);
    if (cfg.batch_tracks > train_tracks.size()) {
        throw InvalidArgument("train: batch of " + std::to_string(cfg.batch_tracks) +
                              " tracks exceeds the " + std::to_string(train_tracks.size()) +
                              " training tracks");
    }
    const bool select_best = cfg.validation_every > 0 && !data.validation.empty();
    const auto val_tracks = prepare_tracks(data.validation, normalizer);
    const Batch val_batch = concat_tracks(val_tracks);

    const Rng root(cfg.seed);
    Rng init_rng = root.child(0);
    Rng batch_rng = root.child(1);
    NetworkParams net = init_network(cfg.arch, init_rng);
    AdamState adam = AdamState::zeros_like(net);

    TrainResult result;
    result.history.reserve(cfg.epochs);
    NetworkParams best = net;
    std::size_t best_epoch = 0;
    std::optional<double> best_val;

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const double lr = cfg.learning_rate_at(e);
        const Batch batch = sample_batch(batch_rng, train_tracks, cfg.batch_tracks);
        const LossGradient lg = parallel_gradient(net, batch, cfg.workers);
        if (!std::isfinite(lg.loss) || !lg.grads.all_finite()) {
            throw TrainingDiverged(e + 1, lg.loss);
        }
        adam_step(net, lg.grads, adam, lr, cfg.adam);

        HistoryEntry entry{e + 1, lr, lg.loss, std::nullopt};
        const bool last = e + 1 == cfg.epochs;
        if (select_best && ((e + 1) % cfg.validation_every == 0 || last)) {
            const double val = batch_mse(net, val_batch);
            if (!std::isfinite(val)) throw TrainingDiverged(e + 1, val);
            entry.val_mse = val;
            if (!best_val || val < *best_val) {
                best_val = val;
                best = net;
                best_epoch = e + 1;
            }
            if (on_validation) on_validation(entry);
        }
        result.history.push_back(entry);
    }
    if (!select_best) {
        best = net;
        best_epoch = cfg.epochs;
    }

    result.selected_epoch = best_epoch;
    result.selected_val_mse = best_val;
    result.checkpoint.net = std::move(best);
    result.checkpoint.normalizer = normalizer;
    result.checkpoint.meta = {cfg.seed, best_epoch,
                              batch_mse(result.checkpoint.net, concat_tracks(train_tracks))};
    return result;
}

void write_history_csv(std::span<const HistoryEntry> history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write history '" + path.string() + "'");
    out << "epoch,lr,train_mse,val_mse\n";
    char buf[128];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,", h.epoch, h.lr, h.train_mse);
        out << buf;
        if (h.val_mse) {
            std::snprintf(buf, sizeof buf, "%.17g", *h.val_mse);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for history '" + path.string() + "'");
}

}  // namespace surgenet
