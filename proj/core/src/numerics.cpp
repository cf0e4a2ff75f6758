#include "surgenet/numerics.hpp"

#include <cmath>

namespace surgenet {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw InvalidArgument("matrix data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string(rows_, cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string shape_string(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b) {
    if (w.cols() != x.size()) {
        throw InvalidArgument("affine: weight matrix " + shape_string(w.rows(), w.cols()) +
                              " needs input length " + std::to_string(w.cols()) + ", got " +
                              std::to_string(x.size()));
    }
    if (w.rows() != b.size()) {
        throw InvalidArgument("affine: weight matrix " + shape_string(w.rows(), w.cols()) +
                              " needs bias length " + std::to_string(w.rows()) + ", got " +
                              std::to_string(b.size()));
    }
    Vector out(b.begin(), b.end());
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto wr = w.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < wr.size(); ++c) acc += wr[c] * x[c];
        out[r] += acc;
    }
    return out;
}

Vector tanh_act(std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    return out;
}

Vector sigmoid_act(std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
    return out;
}

namespace {

template <typename RowAt>
ColumnStats column_stats_impl(std::size_t n, std::size_t dim, RowAt row_at) {
    if (n == 0) throw InvalidArgument("column_stats: empty input");
    ColumnStats stats{Vector(dim, 0.0), Vector(dim, 0.0), std::vector<bool>(dim, false)};
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = row_at(r);
        if (row.size() != dim) {
            throw InvalidArgument("column_stats: row " + std::to_string(r) + " has length " +
                                  std::to_string(row.size()) + ", expected " +
                                  std::to_string(dim));
        }
        for (std::size_t c = 0; c < dim; ++c) stats.means[c] += row[c];
    }
    for (auto& m : stats.means) m /= static_cast<double>(n);
    // Two-pass variance.
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = row_at(r);
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = row[c] - stats.means[c];
            stats.stds[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        const double sd = std::sqrt(stats.stds[c] / static_cast<double>(n));
        if (sd < kConstantStdThreshold) {
            stats.stds[c] = 1.0;
            stats.constant[c] = true;
        } else {
            stats.stds[c] = sd;
        }
    }
    return stats;
}

}  // namespace

ColumnStats column_stats(std::span<const Vector> rows) {
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    return column_stats_impl(rows.size(), dim,
                             [&](std::size_t r) { return std::span<const double>(rows[r]); });
}

ColumnStats column_stats(const Matrix& rows) {
    return column_stats_impl(rows.rows(), rows.cols(), [&](std::size_t r) { return rows.row(r); });
}

}  // namespace surgenet
