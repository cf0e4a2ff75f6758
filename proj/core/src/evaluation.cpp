#include "surgenet/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace surgenet {

namespace {

void check_paired(const Matrix& predicted, const Matrix& observed, std::size_t min_rows,
                  const char* what) {
    if (predicted.rows() != observed.rows() || predicted.cols() != observed.cols()) {
        throw InvalidArgument(std::string(what) + ": predictions " +
                              shape_string(predicted.rows(), predicted.cols()) +
                              " and observations " + shape_string(observed.rows(), observed.cols()) +
                              " differ in shape");
    }
    if (predicted.rows() < min_rows) {
        throw InvalidArgument(std::string(what) + ": need at least " + std::to_string(min_rows) +
                              " samples, got " + std::to_string(predicted.rows()));
    }
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string two_digit(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%02zu", i);
    return buf;
}

}  // namespace

std::vector<double> mse_per_location(const Matrix& predicted, const Matrix& observed) {
    check_paired(predicted, observed, 1, "mse_per_location");
    std::vector<double> mse(predicted.cols(), 0.0);
    for (std::size_t j = 0; j < predicted.rows(); ++j) {
        for (std::size_t i = 0; i < predicted.cols(); ++i) {
            const double d = predicted(j, i) - observed(j, i);
            mse[i] += d * d;
        }
    }
    for (double& m : mse) m /= static_cast<double>(predicted.rows());
    return mse;
}

std::vector<std::optional<double>> r_per_location(const Matrix& predicted,
                                                  const Matrix& observed) {
    check_paired(predicted, observed, 2, "r_per_location");
    const std::size_t n = predicted.rows();
    std::vector<std::optional<double>> r(predicted.cols());
    for (std::size_t i = 0; i < predicted.cols(); ++i) {
        double mp = 0.0, mo = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mp += predicted(j, i);
            mo += observed(j, i);
        }
        mp /= static_cast<double>(n);
        mo /= static_cast<double>(n);
        double spo = 0.0, spp = 0.0, soo = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double dp = predicted(j, i) - mp;
            const double dobs = observed(j, i) - mo;
            spo += dp * dobs;
            spp += dp * dp;
            soo += dobs * dobs;
        }
        if (spp > 0.0 && soo > 0.0) r[i] = spo / std::sqrt(spp * soo);
    }
    return r;
}

std::vector<LocationMetrics> location_metrics(const Matrix& predicted, const Matrix& observed) {
    const auto mse = mse_per_location(predicted, observed);
    const auto r = predicted.rows() >= 2 ? r_per_location(predicted, observed)
                                         : std::vector<std::optional<double>>(mse.size());
    std::vector<LocationMetrics> out;
    for (std::size_t i = 0; i < mse.size(); ++i) {
        out.push_back({i + 1, mse[i], r[i], predicted.rows()});
    }
    return out;
}

std::vector<TrackPrediction> predict_tracks(const NetworkParams& net, const Normalizer& normalizer,
                                            std::span<const StormTrack> tracks) {
    if (normalizer.dim() != net.arch.input_dim) {
        throw InvalidArgument("predict_tracks: normalizer has " + std::to_string(normalizer.dim()) +
                              " features, network expects " + std::to_string(net.arch.input_dim));
    }
    if (net.arch.output_dim != kOutputColumns || net.arch.input_dim != kInputColumns) {
        throw InvalidArgument("predict_tracks: network " + net.arch.label() + " maps " +
                              std::to_string(net.arch.input_dim) + " -> " +
                              std::to_string(net.arch.output_dim) + ", tracks need " +
                              std::to_string(kInputColumns) + " -> " +
                              std::to_string(kOutputColumns));
    }
    std::vector<TrackPrediction> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) {
        Matrix inputs = t.input_matrix();
        normalizer.apply_rows(inputs);
        TrackPrediction p{t.id, Vector(t.rows.size()), t.surge_matrix(), forward_batch(net, inputs)};
        for (std::size_t r = 0; r < t.rows.size(); ++r) p.tau[r] = t.rows[r].inputs.tau;
        out.push_back(std::move(p));
    }
    return out;
}

PooledSamples pool(std::span<const TrackPrediction> predictions, std::optional<RowRange> window) {
    std::size_t rows = 0;
    for (const auto& p : predictions) {
        if (window && window->last >= p.observed.rows()) {
            throw InvalidArgument("pool: window exceeds track '" + p.id + "' length");
        }
        rows += window ? window->size() : p.observed.rows();
    }
    const std::size_t cols = predictions.empty() ? kOutputColumns : predictions[0].observed.cols();
    PooledSamples s{Matrix(rows, cols), Matrix(rows, cols)};
    std::size_t out = 0;
    for (const auto& p : predictions) {
        const std::size_t first = window ? window->first : 0;
        const std::size_t last = window ? window->last : p.observed.rows() - 1;
        for (std::size_t r = first; r <= last; ++r, ++out) {
            std::copy(p.predicted.row(r).begin(), p.predicted.row(r).end(),
                      s.predicted.row(out).begin());
            std::copy(p.observed.row(r).begin(), p.observed.row(r).end(),
                      s.observed.row(out).begin());
        }
    }
    return s;
}

ErrorSamples collect_errors(std::span<const TrackPrediction> predictions,
                            std::optional<RowRange> window) {
    const auto s = pool(predictions, window);
    ErrorSamples errors(s.predicted.cols());
    for (auto& e : errors) e.reserve(s.predicted.rows());
    for (std::size_t j = 0; j < s.predicted.rows(); ++j) {
        for (std::size_t i = 0; i < s.predicted.cols(); ++i) {
            errors[i].push_back(s.predicted(j, i) - s.observed(j, i));
        }
    }
    return errors;
}

ErrorSamples collect_errors(const NetworkParams& net, const Normalizer& normalizer,
                            std::span<const StormTrack> tracks,
                            std::optional<double> window_half_width) {
    const auto predictions = predict_tracks(net, normalizer, tracks);
    std::optional<RowRange> window;
    if (window_half_width) window = landfall_window(*window_half_width);
    return collect_errors(predictions, window);
}

std::vector<LocationReport> summarize(std::span<const LocationMetrics> metrics,
                                      std::span<const ErrorPdf> full_pdfs,
                                      std::span<const ErrorPdf> landfall_pdfs) {
    if (full_pdfs.size() != metrics.size() || landfall_pdfs.size() != metrics.size()) {
        throw InvalidArgument("summarize: metrics and PDFs cover different location counts");
    }
    std::vector<LocationReport> rows;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        LocationReport row;
        row.location = metrics[i].location;
        row.n = metrics[i].n;
        row.mse = metrics[i].mse;
        row.r = metrics[i].r;
        row.p_within_010 = prob_within(full_pdfs[i], 0.10);
        row.e_star_95 = quantile_interval(full_pdfs[i], 0.95);
        row.n_landfall = landfall_pdfs[i].sample_count;
        row.p_within_010_landfall = prob_within(landfall_pdfs[i], 0.10);
        row.p_within_050_landfall = prob_within(landfall_pdfs[i], 0.50);
        rows.push_back(row);
    }
    return rows;
}

ErrorAnalysis analyze_errors(std::span<const TrackPrediction> predictions,
                             double window_half_width) {
    const auto window = landfall_window(window_half_width);
    const auto full_errors = collect_errors(predictions);
    const auto landfall_errors = collect_errors(predictions, window);
    ErrorAnalysis out;
    for (std::size_t i = 0; i < full_errors.size(); ++i) {
        out.full.push_back(fit_kde(full_errors[i], i + 1));
        out.landfall.push_back(fit_kde(landfall_errors[i], i + 1));
    }
    return out;
}

std::vector<LocationReport> evaluate_tracks(std::span<const TrackPrediction> predictions,
                                            double window_half_width) {
    const auto all = pool(predictions);
    const auto metrics = location_metrics(all.predicted, all.observed);
    const auto pdfs = analyze_errors(predictions, window_half_width);
    return summarize(metrics, pdfs.full, pdfs.landfall);
}

void write_metrics_csv(std::span<const LocationReport> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics '" + path.string() + "'");
    out << "location,mse,r,p_within_0.10,e_star_95,p_within_0.10_landfall,"
           "p_within_0.50_landfall\n";
    for (const auto& r : rows) {
        out << r.location << ',' << format_real(r.mse) << ','
            << (r.r ? format_real(*r.r) : std::string("nan")) << ','
            << format_real(r.p_within_010) << ',' << format_real(r.e_star_95) << ','
            << format_real(r.p_within_010_landfall) << ',' << format_real(r.p_within_050_landfall)
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed for metrics '" + path.string() + "'");
}

void write_timeseries_csv(const TrackPrediction& track, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write time series '" + path.string() + "'");
    const std::size_t k = track.observed.cols();
    out << "tau_days";
    for (std::size_t i = 1; i <= k; ++i) out << ",observed_" << two_digit(i);
    for (std::size_t i = 1; i <= k; ++i) out << ",predicted_" << two_digit(i);
    out << '\n';
    for (std::size_t r = 0; r < track.tau.size(); ++r) {
        out << format_real(track.tau[r]);
        for (double v : track.observed.row(r)) out << ',' << format_real(v);
        for (double v : track.predicted.row(r)) out << ',' << format_real(v);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for time series '" + path.string() + "'");
}

void write_pdf_csv(const ErrorAnalysis& analysis, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write error pdfs '" + path.string() + "'");
    out << "location,population,error_m,density\n";
    auto emit = [&](const ErrorPdf& pdf, const char* population) {
        if (pdf.degenerate) {
            out << pdf.location << ',' << population << ',' << format_real(pdf.point_mass)
                << ",inf\n";
            return;
        }
        for (std::size_t k = 0; k < pdf.grid.size(); ++k) {
            out << pdf.location << ',' << population << ',' << format_real(pdf.grid[k]) << ','
                << format_real(pdf.density[k]) << '\n';
        }
    };
    for (const auto& pdf : analysis.full) emit(pdf, "full");
    for (const auto& pdf : analysis.landfall) emit(pdf, "landfall");
    if (!out) throw std::runtime_error("write failed for error pdfs '" + path.string() + "'");
}

void emit_report(std::span<const LocationReport> rows, std::span<const TrackPrediction> tracks,
                 const std::filesystem::path& dir, const std::string& metrics_file) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "timeseries", ec);
    if (ec) {
        throw std::runtime_error("cannot create report directory '" + dir.string() +
                                 "': " + ec.message());
    }
    write_metrics_csv(rows, dir / metrics_file);
    for (const auto& t : tracks) write_timeseries_csv(t, dir / "timeseries" / (t.id + ".csv"));
}

}  // namespace surgenet
