#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surgenet {

/// Raised on dimension mismatches and out-of-domain arguments.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Returns W·x + b.
Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b);

Vector tanh_act(std::span<const double> v);
Vector sigmoid_act(std::span<const double> v);

struct ColumnStats {
    Vector means;
    /// Population standard deviations; constant columns report 1.
    Vector stds;
    std::vector<bool> constant;
};

/// Columns whose population std falls below this are flagged constant.
inline constexpr double kConstantStdThreshold = 1e-12;

ColumnStats column_stats(std::span<const Vector> rows);

/// Same statistics over the rows of a matrix.
ColumnStats column_stats(const Matrix& rows);

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace surgenet
