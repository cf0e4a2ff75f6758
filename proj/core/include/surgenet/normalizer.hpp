#pragma once

#include <span>
#include <vector>

#include "surgenet/dataset.hpp"
#include "surgenet/numerics.hpp"

namespace surgenet {

/// Per-feature standardization of network inputs: (x - mean) / std.
struct Normalizer {
    Vector means;
    Vector stds;
    std::vector<bool> constant;

    std::size_t dim() const noexcept { return means.size(); }

    void validate() const;
    Vector apply(std::span<const double> x) const;
    Vector invert(std::span<const double> z) const;
    /// Standardizes every row in place.
    void apply_rows(Matrix& rows) const;

    bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(std::span<const Vector> samples);
/// Fits over every row of every track; call with the training split only.
Normalizer fit_normalizer(std::span<const StormTrack> tracks);

}  // namespace surgenet
