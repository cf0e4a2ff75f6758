#include "surgenet/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace surgenet {

namespace {

constexpr std::size_t kMaxGridPoints = std::size_t{1} << 21;
// exp(-32) ~ 1e-14; kernels are truncated beyond this many bandwidths.
constexpr double kKernelCutoff = 8.0;

double interpolate(const ErrorPdf& pdf, double x) {
    const auto& g = pdf.grid;
    if (x <= g.front()) return x < g.front() ? 0.0 : pdf.density.front();
    if (x >= g.back()) return x > g.back() ? 0.0 : pdf.density.back();
    const double dx = g[1] - g[0];
    auto i = static_cast<std::size_t>((x - g.front()) / dx);
    i = std::min(i, g.size() - 2);
    const double t = (x - g[i]) / dx;
    return pdf.density[i] + t * (pdf.density[i + 1] - pdf.density[i]);
}

/// Trapezoidal integral of the interpolated density over [lo, hi].
double integrate(const ErrorPdf& pdf, double lo, double hi) {
    const auto& g = pdf.grid;
    lo = std::max(lo, g.front());
    hi = std::min(hi, g.back());
    if (hi <= lo) return 0.0;
    const double dx = g[1] - g[0];
    // First grid index strictly above lo, last strictly below hi.
    auto first = static_cast<std::size_t>(std::floor((lo - g.front()) / dx)) + 1;
    auto last = static_cast<std::size_t>(std::ceil((hi - g.front()) / dx));
    last = last == 0 ? 0 : last - 1;
    first = std::min(first, g.size() - 1);
    last = std::min(last, g.size() - 1);
    if (first > last || g[first] >= hi) {
        return 0.5 * (interpolate(pdf, lo) + interpolate(pdf, hi)) * (hi - lo);
    }
    double sum = 0.5 * (interpolate(pdf, lo) + pdf.density[first]) * (g[first] - lo);
    for (std::size_t i = first; i < last; ++i) {
        sum += 0.5 * (pdf.density[i] + pdf.density[i + 1]) * dx;
    }
    sum += 0.5 * (pdf.density[last] + interpolate(pdf, hi)) * (hi - g[last]);
    return sum;
}

}  // namespace

double ErrorPdf::integral() const {
    if (degenerate) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        sum += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
    }
    return sum;
}

ErrorPdf fit_kde(std::span<const double> errors, std::size_t location) {
    if (errors.size() < kMinKdeSamples) {
        throw InvalidArgument("fit_kde: need at least " + std::to_string(kMinKdeSamples) +
                              " samples, got " + std::to_string(errors.size()));
    }
    ErrorPdf pdf;
    pdf.location = location;
    pdf.sample_count = errors.size();

    const double n = static_cast<double>(errors.size());
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= n;
    double ss = 0.0;
    for (double e : errors) ss += (e - mean) * (e - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const auto [min_it, max_it] = std::minmax_element(errors.begin(), errors.end());
    if (*min_it == *max_it) {
        pdf.degenerate = true;
        pdf.point_mass = *min_it;
        return pdf;
    }

    const double h = sd * std::pow(n, -0.2);
    pdf.bandwidth = h;
    const double lo = *min_it - 4.0 * h;
    const double hi = *max_it + 4.0 * h;
    const auto wanted = static_cast<std::size_t>(std::ceil((hi - lo) / (0.25 * h))) + 1;
    const std::size_t points = std::clamp(wanted, kMinKdeGridPoints, kMaxGridPoints);
    const double dx = (hi - lo) / static_cast<double>(points - 1);
    pdf.grid.resize(points);
    for (std::size_t i = 0; i < points; ++i) pdf.grid[i] = lo + dx * static_cast<double>(i);
    pdf.density.assign(points, 0.0);

    // Scatter each kernel onto the grid points within the cutoff.
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    const double inv_h = 1.0 / h;
    for (double e : errors) {
        const double from = (e - kKernelCutoff * h - lo) / dx;
        const double to = (e + kKernelCutoff * h - lo) / dx;
        const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(from)));
        const auto i1 = static_cast<std::size_t>(
            std::min(static_cast<double>(points - 1), std::floor(to)));
        for (std::size_t i = i0; i <= i1; ++i) {
            const double u = (pdf.grid[i] - e) * inv_h;
            pdf.density[i] += std::exp(-0.5 * u * u);
        }
    }
    for (double& d : pdf.density) d *= norm;
    return pdf;
}

double prob_within(const ErrorPdf& pdf, double bound) {
    if (!(bound > 0.0)) {
        throw InvalidArgument("prob_within: bound must be > 0, got " + std::to_string(bound));
    }
    if (pdf.degenerate) return std::abs(pdf.point_mass) <= bound ? 1.0 : 0.0;
    return integrate(pdf, -bound, bound);
}

double quantile_interval(const ErrorPdf& pdf, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) {
        throw InvalidArgument("quantile_interval: mass must lie in (0, 1), got " +
                              std::to_string(mass));
    }
    if (pdf.degenerate) return std::abs(pdf.point_mass);
    double lo = 0.0;
    double hi = std::max(std::abs(pdf.grid.front()), std::abs(pdf.grid.back()));
    if (prob_within(pdf, hi) < mass) return hi;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (prob_within(pdf, mid) >= mass) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace surgenet
