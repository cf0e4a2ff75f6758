#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surgenet/checkpoint.hpp"
#include "surgenet/dataset.hpp"
#include "surgenet/kde.hpp"
#include "surgenet/numerics.hpp"

namespace surgenet {

/// MSE_i = mean_j (pred_ij - obs_ij)^2 per column.
std::vector<double> mse_per_location(const Matrix& predicted, const Matrix& observed);

/// Pearson correlation per column; nullopt where either series is constant.
std::vector<std::optional<double>> r_per_location(const Matrix& predicted,
                                                  const Matrix& observed);

struct LocationMetrics {
    std::size_t location = 0;  // 1-based
    double mse = 0.0;          // m^2
    std::optional<double> r;
    std::size_t n = 0;
};

std::vector<LocationMetrics> location_metrics(const Matrix& predicted, const Matrix& observed);

/// Network output alongside the observations for one track.
struct TrackPrediction {
    std::string id;
    Vector tau;
    Matrix observed;
    Matrix predicted;
};

std::vector<TrackPrediction> predict_tracks(const NetworkParams& net, const Normalizer& normalizer,
                                            std::span<const StormTrack> tracks);

/// Stacks every track's rows (or only `window` rows) into paired matrices.
struct PooledSamples {
    Matrix predicted;
    Matrix observed;
};
PooledSamples pool(std::span<const TrackPrediction> predictions,
                   std::optional<RowRange> window = std::nullopt);

/// errors[location][sample] = predicted - observed.
using ErrorSamples = std::vector<std::vector<double>>;

ErrorSamples collect_errors(std::span<const TrackPrediction> predictions,
                            std::optional<RowRange> window = std::nullopt);
ErrorSamples collect_errors(const NetworkParams& net, const Normalizer& normalizer,
                            std::span<const StormTrack> tracks,
                            std::optional<double> window_half_width = std::nullopt);

/// One row of the per-location accuracy table.
struct LocationReport {
    std::size_t location = 0;  // 1-based
    std::size_t n = 0;
    double mse = 0.0;
    std::optional<double> r;
    double p_within_010 = 0.0;
    double e_star_95 = 0.0;
    std::size_t n_landfall = 0;
    double p_within_010_landfall = 0.0;
    double p_within_050_landfall = 0.0;
};

/// Combines full-record metrics and error PDFs with the landfall-window PDFs.
std::vector<LocationReport> summarize(std::span<const LocationMetrics> metrics,
                                      std::span<const ErrorPdf> full_pdfs,
                                      std::span<const ErrorPdf> landfall_pdfs);

/// Per-location error PDFs over whole tracks and over the landfall window.
struct ErrorAnalysis {
    std::vector<ErrorPdf> full;
    std::vector<ErrorPdf> landfall;
};

ErrorAnalysis analyze_errors(std::span<const TrackPrediction> predictions,
                             double window_half_width = kDefaultLandfallHalfWidth);

/// Metrics, full-record and landfall-window KDEs for a set of tracks.
std::vector<LocationReport> evaluate_tracks(std::span<const TrackPrediction> predictions,
                                            double window_half_width = kDefaultLandfallHalfWidth);

/// Header: location,mse,r,p_within_0.10,e_star_95,p_within_0.10_landfall,p_within_0.50_landfall
void write_metrics_csv(std::span<const LocationReport> rows, const std::filesystem::path& path);

/// Header: tau_days,observed_01..observed_10,predicted_01..predicted_10
void write_timeseries_csv(const TrackPrediction& track, const std::filesystem::path& path);

/// Long-format density table: location,population,error_m,density.
void write_pdf_csv(const ErrorAnalysis& analysis, const std::filesystem::path& path);

/// Writes `metrics_file` into `dir` plus timeseries/<track id>.csv per track.
void emit_report(std::span<const LocationReport> rows, std::span<const TrackPrediction> tracks,
                 const std::filesystem::path& dir, const std::string& metrics_file = "metrics.csv");

}  // namespace surgenet
