#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surgenet/numerics.hpp"

namespace surgenet {

inline constexpr std::size_t kInputColumns = 6;
inline constexpr std::size_t kOutputColumns = 10;
inline constexpr std::size_t kRowsPerTrack = 193;
inline constexpr std::size_t kLandfallRow = 144;
inline constexpr std::size_t kStepsPerDay = 48;
inline constexpr double kStepDays = 1.0 / kStepsPerDay;
inline constexpr double kTauStart = 3.0;
inline constexpr double kTauEnd = -1.0;

/// Fixed CSV header names, in column order.
const std::array<std::string, kInputColumns + kOutputColumns>& track_csv_columns();

/// tau on the canonical grid: 3 - row / 48 days.
constexpr double grid_tau(std::size_t row) noexcept {
    return kTauStart - static_cast<double>(row) / static_cast<double>(kStepsPerDay);
}

/// The six network inputs of one time step.
struct StormInputs {
    double tau = 0.0;     // days to landfall, positive before landfall
    double lon = 0.0;     // degrees East
    double lat = 0.0;     // degrees North
    double rmax = 0.0;    // km
    double vmax = 0.0;    // m/s
    double fspeed = 0.0;  // m/s

    std::array<double, kInputColumns> as_array() const noexcept {
        return {tau, lon, lat, rmax, vmax, fspeed};
    }
};

struct TrackRow {
    StormInputs inputs;
    std::array<double, kOutputColumns> surge{};  // meters above mean sea level
};

struct StormTrack {
    std::string id;
    std::vector<TrackRow> rows;

    /// Throws TrackValidationError on any broken invariant.
    void validate() const;

    /// rows x 6 input matrix (un-normalized).
    Matrix input_matrix() const;
    /// rows x 10 surge matrix.
    Matrix surge_matrix() const;
};

enum class TrackErrorKind {
    io,
    header,
    column_count,
    parse,
    non_finite,
    row_count,
    tau_grid,
    out_of_range,
};

std::string_view to_string(TrackErrorKind kind) noexcept;

/// Validation failure for a track; row/column are 0-based data positions,
/// or -1 when not applicable.
class TrackValidationError : public std::runtime_error {
public:
    TrackValidationError(TrackErrorKind kind, const std::string& message, long row = -1,
                         long column = -1);

    TrackErrorKind kind() const noexcept { return kind_; }
    long row() const noexcept { return row_; }
    long column() const noexcept { return column_; }

private:
    TrackErrorKind kind_;
    long row_;
    long column_;
};

StormTrack load_track_csv(const std::filesystem::path& path);
/// Writes the 16-column CSV with 17 significant digits per value.
void save_track_csv(const StormTrack& track, const std::filesystem::path& path);

struct DatasetSplit {
    std::vector<StormTrack> training;
    std::vector<StormTrack> validation;
    std::vector<StormTrack> testing;
};

struct SplitSizes {
    std::size_t training = 0;
    std::size_t validation = 0;
    std::size_t testing = 0;
};

/// 15% validation and 15% testing (floored, at least one each); remainder trains.
SplitSizes split_sizes(std::size_t n_tracks);

/// Seeded shuffle followed by the 70/15/15 partition.
DatasetSplit split_dataset(std::vector<StormTrack> tracks, std::uint64_t seed);

enum class SplitRole { training, validation, testing };
std::string_view to_string(SplitRole role) noexcept;

struct ManifestEntry {
    std::string file;  // relative to the manifest's directory
    SplitRole role = SplitRole::training;
};

/// Manifest CSV: header "file,split", one line per track.
void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Loads every track listed in `corpus_dir/manifest.csv` into its split.
DatasetSplit load_corpus(const std::filesystem::path& corpus_dir);

inline constexpr const char* kManifestFile = "manifest.csv";

/// Inclusive row range [first, last].
struct RowRange {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const noexcept { return last - first + 1; }
};

inline constexpr double kDefaultLandfallHalfWidth = 0.5;

/// Rows of the canonical grid with |tau| <= half_width_days, clipped to the track.
RowRange landfall_window(double half_width_days);

}  // namespace surgenet
