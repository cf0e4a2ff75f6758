#pragma once

#include <cstddef>
#include <span>

#include "surgenet/numerics.hpp"

namespace surgenet {

/// Gaussian kernel density estimate of prediction errors at one location.
struct ErrorPdf {
    std::size_t location = 0;
    std::size_t sample_count = 0;
    /// Scott's rule: sample std * n^(-1/5). Zero when degenerate.
    double bandwidth = 0.0;
    /// Uniform grid over [min - 4h, max + 4h].
    Vector grid;
    Vector density;
    /// All samples equal; the distribution is a point mass at `point_mass`.
    bool degenerate = false;
    double point_mass = 0.0;

    /// Trapezoidal integral of the density over the whole grid.
    double integral() const;
};

inline constexpr std::size_t kMinKdeSamples = 10;
inline constexpr std::size_t kMinKdeGridPoints = 1024;

/// Needs at least kMinKdeSamples samples. The grid spacing is at most h/4.
ErrorPdf fit_kde(std::span<const double> errors, std::size_t location = 0);

/// P(|e| <= bound), trapezoidal on the grid with interpolated endpoints.
double prob_within(const ErrorPdf& pdf, double bound);

/// Smallest e* with prob_within(pdf, e*) >= mass, by bisection to 1e-6.
double quantile_interval(const ErrorPdf& pdf, double mass);

}  // namespace surgenet
