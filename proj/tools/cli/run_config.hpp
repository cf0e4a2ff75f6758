#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "surgenet/dataset.hpp"
#include "surgenet/oracle.hpp"
#include "surgenet/training.hpp"

namespace surgenet::cli {

inline constexpr std::uint64_t kDefaultSeed = 20170324;
inline constexpr std::size_t kDefaultTrackCount = 324;

enum class EvalSplit { training, validation, testing, all };

EvalSplit parse_split(std::string_view name);
std::string_view to_string(EvalSplit split) noexcept;

/// Bad configuration: unknown keys, wrong types or out-of-range values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a subcommand may need. Defaults reproduce the reference setup.
///
/// Config files are JSON objects with these keys, all optional:
///
///   seed, corpus, checkpoint, history, report,
///   generate: { n_tracks },
///   train:    { hidden, activation, epochs, batch_tracks, lr, lr_decay,
///               beta1, beta2, epsilon, workers, validation_every },
///   evaluate: { split, window },
///   oracle:   { stations: [[lon, lat] x 10], amplitude, decay_km, width_days,
///               asymmetry, wind_coefficient, rmax_ref_km, fspeed_ref_ms,
///               speed_gain, heading_ref_deg, heading_turn_deg }
///
/// `hidden` is a string such as "32,64" or an array [32, 64].
struct RunConfig {
    std::uint64_t seed = kDefaultSeed;
    std::size_t n_tracks = kDefaultTrackCount;
    std::filesystem::path corpus = "corpus";
    std::filesystem::path checkpoint = "model.ckpt";
    /// Empty: next to the checkpoint as <stem>.history.csv.
    std::filesystem::path history;
    std::filesystem::path report = "report";
    TrainConfig train;
    EvalSplit split = EvalSplit::testing;
    double window = kDefaultLandfallHalfWidth;
    OracleParams oracle = OracleParams::defaults();

    /// Throws ConfigError.
    void validate() const;
    std::filesystem::path history_path() const;
};

/// Starts from the defaults and applies every key in `json_text`.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace surgenet::cli
