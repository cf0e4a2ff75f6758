#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "surgenet/network.hpp"
#include "surgenet/normalizer.hpp"

namespace surgenet {

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::uint64_t epochs_trained = 0;
    double final_train_mse = 0.0;

    bool operator==(const TrainingMeta&) const = default;
};

/// Everything needed for standalone inference.
struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    NetworkParams net;
    Normalizer normalizer;
    TrainingMeta meta;

    bool operator==(const Checkpoint&) const = default;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File missing or unreadable/unwritable.
class CheckpointIoError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

/// Malformed or truncated content.
class CheckpointParseError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

class CheckpointVersionError : public CheckpointError {
public:
    CheckpointVersionError(int found, int expected);

    int found() const noexcept { return found_; }
    int expected() const noexcept { return expected_; }

private:
    int found_;
    int expected_;
};

/// Layer or normalizer shapes disagree with the declared architecture.
class CheckpointDimensionError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

/// Plain-text format, whitespace separated, numbers at 17 significant digits:
///
///   surgenet-checkpoint
///   format_version 1
///   activation tanh
///   input_dim 6
///   hidden_sizes 2 32 64          (count, then sizes)
///   output_dim 10
///   seed <u64>
///   epochs_trained <u64>
///   final_train_mse <real>
///   normalizer_means 6 <reals>
///   normalizer_stds 6 <reals>
///   normalizer_constant 6 <0|1 ...>
///   layer 0 weights 32 6          (then rows*cols reals, row-major)
///   bias 32 <reals>
///   ...                            (one layer block per hidden layer + output)
///   end
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace surgenet
