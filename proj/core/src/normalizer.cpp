#include "surgenet/normalizer.hpp"

#include <cmath>

namespace surgenet {

void Normalizer::validate() const {
    if (stds.size() != means.size() || constant.size() != means.size()) {
        throw InvalidArgument("normalizer: means, stds and flags must have equal length");
    }
    for (std::size_t i = 0; i < stds.size(); ++i) {
        if (!(stds[i] > 0.0) || !std::isfinite(stds[i]) || !std::isfinite(means[i])) {
            throw InvalidArgument("normalizer: feature " + std::to_string(i) +
                                  " needs finite mean and positive std");
        }
    }
}

Vector Normalizer::apply(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw InvalidArgument("normalizer: input length " + std::to_string(x.size()) +
                              ", expected " + std::to_string(dim()));
    }
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - means[i]) / stds[i];
    return z;
}

Vector Normalizer::invert(std::span<const double> z) const {
    if (z.size() != dim()) {
        throw InvalidArgument("normalizer: input length " + std::to_string(z.size()) +
                              ", expected " + std::to_string(dim()));
    }
    Vector x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * stds[i] + means[i];
    return x;
}

void Normalizer::apply_rows(Matrix& rows) const {
    if (rows.cols() != dim()) {
        throw InvalidArgument("normalizer: row width " + std::to_string(rows.cols()) +
                              ", expected " + std::to_string(dim()));
    }
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        auto row = rows.row(r);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = (row[i] - means[i]) / stds[i];
    }
}

namespace {

Normalizer from_stats(ColumnStats stats) {
    return {std::move(stats.means), std::move(stats.stds), std::move(stats.constant)};
}

}  // namespace

Normalizer fit_normalizer(std::span<const Vector> samples) {
    return from_stats(column_stats(samples));
}

Normalizer fit_normalizer(std::span<const StormTrack> tracks) {
    std::size_t total = 0;
    for (const auto& t : tracks) total += t.rows.size();
    Matrix all(total, kInputColumns);
    std::size_t r = 0;
    for (const auto& t : tracks) {
        for (const auto& row : t.rows) {
            const auto in = row.inputs.as_array();
            std::copy(in.begin(), in.end(), all.row(r++).begin());
        }
    }
    return from_stats(column_stats(all));
}

}  // namespace surgenet
