#include "surgenet/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "surgenet/rng.hpp"

namespace surgenet {

namespace {

constexpr double kTauTolerance = 1e-9;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

bool parse_double(std::string_view token, double& out) {
    token = strip(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return !token.empty() && ec == std::errc{} && ptr == token.data() + token.size();
}

void format_double(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

std::string position(long row, long column) {
    std::string s;
    if (row >= 0) s += " (data row " + std::to_string(row + 1);
    if (column >= 0) {
        s += row >= 0 ? ", " : " (";
        s += "column " + track_csv_columns()[static_cast<std::size_t>(column)];
    }
    if (!s.empty()) s += ")";
    return s;
}

}  // namespace

const std::array<std::string, kInputColumns + kOutputColumns>& track_csv_columns() {
    static const std::array<std::string, kInputColumns + kOutputColumns> columns = {
        "tau_days", "lon_deg",  "lat_deg",  "rmax_km",  "vmax_ms",  "fspeed_ms",
        "surge_01", "surge_02", "surge_03", "surge_04", "surge_05", "surge_06",
        "surge_07", "surge_08", "surge_09", "surge_10"};
    return columns;
}

std::string_view to_string(TrackErrorKind kind) noexcept {
    switch (kind) {
        case TrackErrorKind::io: return "io";
        case TrackErrorKind::header: return "header";
        case TrackErrorKind::column_count: return "column-count";
        case TrackErrorKind::parse: return "parse";
        case TrackErrorKind::non_finite: return "non-finite";
        case TrackErrorKind::row_count: return "row-count";
        case TrackErrorKind::tau_grid: return "tau-grid";
        case TrackErrorKind::out_of_range: return "out-of-range";
    }
    return "unknown";
}

TrackValidationError::TrackValidationError(TrackErrorKind kind, const std::string& message,
                                           long row, long column)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message +
                         position(row, column)),
      kind_(kind),
      row_(row),
      column_(column) {}

void StormTrack::validate() const {
    if (rows.size() != kRowsPerTrack) {
        throw TrackValidationError(TrackErrorKind::row_count,
                                   "track '" + id + "' has " + std::to_string(rows.size()) +
                                       " rows, expected " + std::to_string(kRowsPerTrack));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto in = row.inputs.as_array();
        for (std::size_t c = 0; c < in.size(); ++c) {
            if (!std::isfinite(in[c])) {
                throw TrackValidationError(TrackErrorKind::non_finite, "non-finite input",
                                           static_cast<long>(r), static_cast<long>(c));
            }
        }
        for (std::size_t c = 0; c < kOutputColumns; ++c) {
            if (!std::isfinite(row.surge[c])) {
                throw TrackValidationError(TrackErrorKind::non_finite, "non-finite surge",
                                           static_cast<long>(r),
                                           static_cast<long>(kInputColumns + c));
            }
        }
        if (std::abs(row.inputs.tau - grid_tau(r)) > kTauTolerance) {
            throw TrackValidationError(TrackErrorKind::tau_grid,
                                       "tau " + std::to_string(row.inputs.tau) +
                                           " is off the 30-minute grid (expected " +
                                           std::to_string(grid_tau(r)) + ")",
                                       static_cast<long>(r), 0);
        }
        if (!(row.inputs.rmax > 0.0)) {
            throw TrackValidationError(TrackErrorKind::out_of_range, "rmax must be > 0",
                                       static_cast<long>(r), 3);
        }
        if (row.inputs.vmax < 0.0) {
            throw TrackValidationError(TrackErrorKind::out_of_range, "vmax must be >= 0",
                                       static_cast<long>(r), 4);
        }
        if (row.inputs.fspeed < 0.0) {
            throw TrackValidationError(TrackErrorKind::out_of_range, "fspeed must be >= 0",
                                       static_cast<long>(r), 5);
        }
    }
}

Matrix StormTrack::input_matrix() const {
    Matrix m(rows.size(), kInputColumns);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto in = rows[r].inputs.as_array();
        std::copy(in.begin(), in.end(), m.row(r).begin());
    }
    return m;
}

Matrix StormTrack::surge_matrix() const {
    Matrix m(rows.size(), kOutputColumns);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r].surge.begin(), rows[r].surge.end(), m.row(r).begin());
    }
    return m;
}

StormTrack load_track_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TrackValidationError(TrackErrorKind::io, "cannot open '" + path.string() + "'");
    }
    const auto& columns = track_csv_columns();
    std::string line;
    if (!std::getline(in, line)) {
        throw TrackValidationError(TrackErrorKind::header, "'" + path.string() + "' is empty");
    }
    const auto header = split_fields(strip(line));
    if (header.size() != columns.size()) {
        throw TrackValidationError(TrackErrorKind::column_count,
                                   "header has " + std::to_string(header.size()) +
                                       " columns, expected " + std::to_string(columns.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (strip(header[c]) != columns[c]) {
            throw TrackValidationError(TrackErrorKind::header,
                                       "header column " + std::to_string(c + 1) + " is '" +
                                           std::string(strip(header[c])) + "', expected '" +
                                           columns[c] + "'");
        }
    }

    StormTrack track;
    track.id = path.stem().string();
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        const auto r = static_cast<long>(track.rows.size());
        const auto fields = split_fields(strip(line));
        if (fields.size() != columns.size()) {
            throw TrackValidationError(TrackErrorKind::column_count,
                                       "found " + std::to_string(fields.size()) +
                                           " fields, expected " + std::to_string(columns.size()),
                                       r);
        }
        std::array<double, kInputColumns + kOutputColumns> values{};
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!parse_double(fields[c], values[c])) {
                throw TrackValidationError(TrackErrorKind::parse,
                                           "cannot parse '" + std::string(fields[c]) + "'", r,
                                           static_cast<long>(c));
            }
        }
        TrackRow row;
        row.inputs = {values[0], values[1], values[2], values[3], values[4], values[5]};
        std::copy(values.begin() + kInputColumns, values.end(), row.surge.begin());
        track.rows.push_back(row);
    }
    track.validate();
    return track;
}

void save_track_csv(const StormTrack& track, const std::filesystem::path& path) {
    std::string out;
    const auto& columns = track_csv_columns();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : track.rows) {
        const auto in = row.inputs.as_array();
        for (std::size_t c = 0; c < in.size(); ++c) {
            if (c) out += ',';
            format_double(out, in[c]);
        }
        for (double s : row.surge) {
            out += ',';
            format_double(out, s);
        }
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw TrackValidationError(TrackErrorKind::io, "cannot write '" + path.string() + "'");
    }
    file << out;
    if (!file) {
        throw TrackValidationError(TrackErrorKind::io, "write failed for '" + path.string() + "'");
    }
}

SplitSizes split_sizes(std::size_t n_tracks) {
    if (n_tracks < 3) {
        throw InvalidArgument("split_dataset: need at least 3 tracks, got " +
                              std::to_string(n_tracks));
    }
    const std::size_t held_out = std::max<std::size_t>(1, n_tracks * 15 / 100);
    return {n_tracks - 2 * held_out, held_out, held_out};
}

DatasetSplit split_dataset(std::vector<StormTrack> tracks, std::uint64_t seed) {
    const auto sizes = split_sizes(tracks.size());
    std::vector<std::size_t> order(tracks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    DatasetSplit split;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& track = tracks[order[k]];
        if (k < sizes.training) {
            split.training.push_back(std::move(track));
        } else if (k < sizes.training + sizes.validation) {
            split.validation.push_back(std::move(track));
        } else {
            split.testing.push_back(std::move(track));
        }
    }
    return split;
}

std::string_view to_string(SplitRole role) noexcept {
    switch (role) {
        case SplitRole::training: return "train";
        case SplitRole::validation: return "val";
        case SplitRole::testing: return "test";
    }
    return "unknown";
}

void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
    out << "file,split\n";
    for (const auto& e : entries) out << e.file << ',' << to_string(e.role) << '\n';
    if (!out) throw std::runtime_error("write failed for manifest '" + path.string() + "'");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || strip(line) != "file,split") {
        throw std::runtime_error("manifest '" + path.string() + "' must start with 'file,split'");
    }
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip(line);
        if (text.empty()) continue;
        const auto fields = split_fields(text);
        if (fields.size() != 2) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                     ": expected 'file,split'");
        }
        ManifestEntry e{std::string(strip(fields[0])), SplitRole::training};
        const auto role = strip(fields[1]);
        if (role == "train") {
            e.role = SplitRole::training;
        } else if (role == "val") {
            e.role = SplitRole::validation;
        } else if (role == "test") {
            e.role = SplitRole::testing;
        } else {
            throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                     ": unknown split '" + std::string(role) + "'");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

DatasetSplit load_corpus(const std::filesystem::path& corpus_dir) {
    DatasetSplit split;
    for (const auto& entry : read_manifest(corpus_dir / kManifestFile)) {
        auto track = load_track_csv(corpus_dir / entry.file);
        switch (entry.role) {
            case SplitRole::training: split.training.push_back(std::move(track)); break;
            case SplitRole::validation: split.validation.push_back(std::move(track)); break;
            case SplitRole::testing: split.testing.push_back(std::move(track)); break;
        }
    }
    return split;
}

RowRange landfall_window(double half_width_days) {
    if (!(half_width_days > 0.0 && half_width_days <= 1.0)) {
        throw InvalidArgument("landfall_window: half width must be in (0, 1] days, got " +
                              std::to_string(half_width_days));
    }
    const auto steps = static_cast<std::size_t>(
        std::floor(half_width_days * static_cast<double>(kStepsPerDay) + kTauTolerance));
    return {kLandfallRow - std::min(steps, kLandfallRow),
            std::min(kLandfallRow + steps, kRowsPerTrack - 1)};
}

}  // namespace surgenet
