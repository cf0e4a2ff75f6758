#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "surgenet/dataset.hpp"
#include "surgenet/rng.hpp"

namespace surgenet {

struct GeoPoint {
    double lon = 0.0;  // degrees East
    double lat = 0.0;  // degrees North

    bool operator==(const GeoPoint&) const = default;
};

/// Equirectangular projection about a fixed reference latitude; accurate
/// to a few percent over the few hundred km that matter for surge.
inline constexpr double kReferenceLatitudeDeg = 35.0;
inline constexpr double kKmPerDegLat = 110.574;
double km_per_deg_lon();

/// East/north offset in km from `from` to `to`.
std::array<double, 2> offset_km(const GeoPoint& from, const GeoPoint& to);
double distance_km(const GeoPoint& a, const GeoPoint& b);

/// Constants of the analytic surge response that stands in for a
/// hydrodynamic model.
///
/// For station s at distance d (km) and compass bearing beta from the storm
/// center, with storm heading theta:
///
///   surge_s = a * dp * exp(-d^2 / (2 L^2)) * exp(-(tau / w)^2)
///             * (1 + asym * sin(beta - theta) * (1 - exp(-d^2 / (2 rmax^2))))
///             * g(fspeed, rmax)
///
///   dp    = (vmax / wind_coefficient)^2          pressure deficit, hPa
///   theta = heading_ref + heading_turn * (fspeed - fspeed_ref)
///   g     = sqrt(rmax / rmax_ref) * (1 + speed_gain * (fspeed - fspeed_ref) / fspeed_ref)
///
/// The asymmetry term fades inside the radius of maximum winds so the
/// response stays continuous when the center passes over a station.
/// Every quantity is a function of the six input columns, so a track's
/// surge is fully determined by its inputs.
struct OracleParams {
    std::array<GeoPoint, kOutputColumns> stations{};
    double amplitude = 0.025;          // a, m per hPa
    double decay_km = 200.0;           // L
    double width_days = 1.0;           // w
    double asymmetry = 0.3;            // asym
    double wind_coefficient = 6.3;     // m/s per sqrt(hPa)
    double rmax_ref_km = 40.0;
    double fspeed_ref_ms = 6.0;
    double speed_gain = 0.3;
    double heading_ref_deg = 15.0;     // compass, clockwise from north
    double heading_turn_deg = 6.0;     // per m/s of forward speed

    /// Throws InvalidArgument on non-positive a, L, w or other broken bounds.
    void validate() const;
    static OracleParams defaults();

    bool operator==(const OracleParams&) const = default;
};

/// Sampling ranges for synthetic tracks.
struct TrackSampling {
    /// Landfall points are drawn uniformly by arc length along this polyline.
    std::vector<GeoPoint> coast;
    double fspeed_min = 2.0, fspeed_max = 10.0;  // m/s
    double rmax_min = 20.0, rmax_max = 80.0;     // km
    double dp_min = 15.0, dp_max = 75.0;         // hPa
    /// e-folding time of the post-landfall pressure fill, days.
    double filling_days = 1.0;

    void validate() const;
    static TrackSampling defaults();
};

double pressure_deficit(double vmax, const OracleParams& oracle);
double storm_heading_deg(double fspeed, const OracleParams& oracle);

std::array<double, kOutputColumns> surge_oracle(const StormInputs& in, const OracleParams& oracle);

/// Straight-line track through a sampled landfall point, 3 days before to
/// 1 day after landfall on the 30-minute grid, with surge from surge_oracle.
StormTrack generate_track(Rng& rng, const OracleParams& oracle,
                          const TrackSampling& sampling = TrackSampling::defaults());

/// n tracks with ids track_0001..; track k uses Rng(seed).child(k).
std::vector<StormTrack> generate_corpus(std::size_t n, std::uint64_t seed,
                                        const OracleParams& oracle,
                                        const TrackSampling& sampling = TrackSampling::defaults());

}  // namespace surgenet
