#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "surgenet/checkpoint.hpp"
#include "surgenet/dataset.hpp"
#include "surgenet/network.hpp"
#include "surgenet/normalizer.hpp"
#include "surgenet/rng.hpp"

namespace surgenet {

/// Per-layer gradients, shaped like NetworkParams::layers.
struct GradientSet {
    std::vector<Layer> layers;

    static GradientSet zeros_like(const NetworkParams& net);

    /// this += scale * other
    void add_scaled(const GradientSet& other, double scale);
    double max_abs_diff(const GradientSet& other) const;
    bool all_finite() const;

    bool operator==(const GradientSet&) const = default;
};

struct LossGradient {
    double loss = 0.0;
    GradientSet grads;
};

/// Rows of (normalized input, target) pairs.
struct Batch {
    Matrix inputs;
    Matrix targets;

    std::size_t rows() const noexcept { return inputs.rows(); }
};

/// Loss (1/K) * sum_k (y_k - t_k)^2 for one sample and its exact gradient.
LossGradient backprop(const NetworkParams& net, std::span<const double> x,
                      std::span<const double> target);

/// Mean loss and mean gradient over batch rows [begin, end).
LossGradient shard_gradient(const NetworkParams& net, const Batch& batch, std::size_t begin,
                            std::size_t end);

/// Contiguous near-equal partition of `rows` into at most `workers` non-empty
/// shards; the first rows % workers shards get one extra row.
std::vector<std::pair<std::size_t, std::size_t>> shard_bounds(std::size_t rows,
                                                              std::size_t workers);

/// Each worker computes the mean gradient of its shard on a shared read-only
/// snapshot of `net`; shard results are combined in shard order, weighted by
/// shard size. Equals the full-batch mean gradient.
LossGradient parallel_gradient(const NetworkParams& net, const Batch& batch, std::size_t workers);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct AdamState {
    GradientSet first_moment;
    GradientSet second_moment;
    std::uint64_t step = 0;

    static AdamState zeros_like(const NetworkParams& net);
};

/// Bias-corrected Adam update of one flat parameter block at step `t` (>= 1).
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::uint64_t t, double lr, const AdamConfig& cfg);

/// Increments state.step and updates every weight and bias of `net` in place.
void adam_step(NetworkParams& net, const GradientSet& grads, AdamState& state, double lr,
               const AdamConfig& cfg);

/// A track with normalized inputs, ready for batching.
struct PreparedTrack {
    Matrix inputs;
    Matrix targets;
};

std::vector<PreparedTrack> prepare_tracks(std::span<const StormTrack> tracks,
                                          const Normalizer& normalizer);

/// Picks `batch_tracks` distinct tracks uniformly and concatenates all of
/// their rows.
Batch sample_batch(Rng& rng, std::span<const PreparedTrack> tracks, std::size_t batch_tracks);

Batch concat_tracks(std::span<const PreparedTrack> tracks);

/// Mean over rows of (1/K) * ||y - t||^2.
double batch_mse(const NetworkParams& net, const Batch& batch);

struct TrainConfig {
    Architecture arch;
    std::size_t epochs = 15000;
    std::size_t batch_tracks = 32;
    double learning_rate = 1e-3;
    double lr_decay = 0.9995;
    AdamConfig adam;
    std::size_t workers = 1;
    std::uint64_t seed = 20170324;
    /// Validate every N epochs and keep the best parameters; 0 keeps the
    /// final parameters instead.
    std::size_t validation_every = 100;

    void validate() const;
    /// Learning rate used during 0-based epoch `epoch`: lr * decay^epoch.
    double learning_rate_at(std::size_t epoch) const;
};

struct HistoryEntry {
    std::size_t epoch = 0;  // 1-based
    double lr = 0.0;
    double train_mse = 0.0;  // loss of this epoch's batch
    std::optional<double> val_mse;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<HistoryEntry> history;
    /// Epoch whose parameters were returned.
    std::size_t selected_epoch = 0;
    std::optional<double> selected_val_mse;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch, double loss);
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

using ProgressCallback = std::function<void(const HistoryEntry&)>;

/// Synchronous data-parallel training: per epoch, sample a batch of whole
/// tracks, average shard gradients across workers, apply one Adam step and
/// decay the learning rate. The normalizer is fit on the training split.
TrainResult train(const TrainConfig& cfg, const DatasetSplit& data,
                  const ProgressCallback& on_validation = {});

/// CSV with header "epoch,lr,train_mse,val_mse"; val_mse empty when not evaluated.
void write_history_csv(std::span<const HistoryEntry> history, const std::filesystem::path& path);

}  // namespace surgenet
