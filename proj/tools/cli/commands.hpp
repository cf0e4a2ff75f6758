#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "run_config.hpp"
#include "surgenet/evaluation.hpp"
#include "surgenet/training.hpp"

namespace surgenet::cli {

/// Writes n_tracks track CSVs and a manifest into `cfg.corpus`. Corpora with
/// fewer than three tracks put every track in the training split.
void cmd_generate(const RunConfig& cfg, std::ostream& log);

/// Trains on `cfg.corpus`, writes the checkpoint and the history CSV.
TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);

/// Writes metrics.csv, error_pdfs.csv and timeseries/ for the chosen split
/// into `cfg.report`. Unless the split is already "all", metrics_all.csv
/// repeats the accuracy table over every track in the corpus.
std::vector<LocationReport> cmd_evaluate(const RunConfig& cfg, std::ostream& log);

/// Reads a CSV with at least the six input columns at arbitrary tau spacing,
/// interpolates it onto the 30-minute grid and writes 193 rows of
/// tau_days,surge_01..surge_10 to `output`.
void cmd_predict(const RunConfig& cfg, const std::filesystem::path& input,
                 const std::filesystem::path& output, std::ostream& log);

/// Rows of an input CSV, matched to columns by header name.
std::vector<StormInputs> read_input_series(const std::filesystem::path& path);

/// Linear interpolation of each input column onto the canonical tau grid.
/// Grid points outside the sampled tau range take the nearest sample's values.
std::vector<StormInputs> interpolate_to_grid(std::span<const StormInputs> samples);

/// Entry point of the surgenet binary. Exit codes: 0 success, 1 runtime
/// failure (files, data, training), 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace surgenet::cli
