#include "surgenet/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace surgenet {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kSecondsPerDay = 86400.0;

}  // namespace

double km_per_deg_lon() {
    static const double value = 111.320 * std::cos(kReferenceLatitudeDeg * kDegToRad);
    return value;
}

std::array<double, 2> offset_km(const GeoPoint& from, const GeoPoint& to) {
    return {(to.lon - from.lon) * km_per_deg_lon(), (to.lat - from.lat) * kKmPerDegLat};
}

double distance_km(const GeoPoint& a, const GeoPoint& b) {
    const auto [dx, dy] = offset_km(a, b);
    return std::hypot(dx, dy);
}

void OracleParams::validate() const {
    if (!(amplitude > 0.0)) throw InvalidArgument("oracle: amplitude must be > 0");
    if (!(decay_km > 0.0)) throw InvalidArgument("oracle: decay_km must be > 0");
    if (!(width_days > 0.0)) throw InvalidArgument("oracle: width_days must be > 0");
    if (!(wind_coefficient > 0.0)) throw InvalidArgument("oracle: wind_coefficient must be > 0");
    if (!(rmax_ref_km > 0.0)) throw InvalidArgument("oracle: rmax_ref_km must be > 0");
    if (!(fspeed_ref_ms > 0.0)) throw InvalidArgument("oracle: fspeed_ref_ms must be > 0");
    if (!(std::abs(asymmetry) < 1.0)) throw InvalidArgument("oracle: |asymmetry| must be < 1");
    if (!(speed_gain >= 0.0 && speed_gain < 1.0)) {
        throw InvalidArgument("oracle: speed_gain must be in [0, 1)");
    }
    for (const auto& s : stations) {
        if (!std::isfinite(s.lon) || !std::isfinite(s.lat)) {
            throw InvalidArgument("oracle: non-finite station coordinate");
        }
    }
}

OracleParams OracleParams::defaults() {
    OracleParams p;
    // Numbered north to south: four along the barrier islands up to the
    // cape, six along the southeast-facing shore where storms make landfall.
    p.stations = {{{-75.60, 36.20},
                   {-75.52, 35.80},
                   {-75.48, 35.45},
                   {-75.62, 35.22},
                   {-76.10, 35.00},
                   {-76.60, 34.68},
                   {-77.25, 34.52},
                   {-77.80, 34.20},
                   {-78.05, 33.90},
                   {-78.60, 33.85}}};
    return p;
}

void TrackSampling::validate() const {
    if (coast.size() < 2) throw InvalidArgument("sampling: coast needs at least two points");
    if (!(fspeed_min >= 0.0 && fspeed_min <= fspeed_max)) {
        throw InvalidArgument("sampling: invalid forward speed range");
    }
    if (!(rmax_min > 0.0 && rmax_min <= rmax_max)) {
        throw InvalidArgument("sampling: invalid rmax range");
    }
    if (!(dp_min >= 0.0 && dp_min <= dp_max)) {
        throw InvalidArgument("sampling: invalid pressure deficit range");
    }
    if (!(filling_days > 0.0)) throw InvalidArgument("sampling: filling_days must be > 0");
}

TrackSampling TrackSampling::defaults() {
    TrackSampling s;
    s.coast = {{-75.55, 35.22}, {-76.10, 34.98}, {-76.60, 34.66}, {-77.25, 34.50},
               {-77.80, 34.18}, {-78.05, 33.88}, {-78.60, 33.83}, {-79.10, 33.60}};
    return s;
}

double pressure_deficit(double vmax, const OracleParams& oracle) {
    const double r = vmax / oracle.wind_coefficient;
    return r * r;
}

double storm_heading_deg(double fspeed, const OracleParams& oracle) {
    return oracle.heading_ref_deg + oracle.heading_turn_deg * (fspeed - oracle.fspeed_ref_ms);
}

std::array<double, kOutputColumns> surge_oracle(const StormInputs& in,
                                                const OracleParams& oracle) {
    const double dp = pressure_deficit(in.vmax, oracle);
    const double heading = storm_heading_deg(in.fspeed, oracle) * kDegToRad;
    const double time_factor = std::exp(-(in.tau / oracle.width_days) * (in.tau / oracle.width_days));
    const double size_speed = std::sqrt(in.rmax / oracle.rmax_ref_km) *
                              (1.0 + oracle.speed_gain * (in.fspeed - oracle.fspeed_ref_ms) /
                                         oracle.fspeed_ref_ms);
    const double peak = oracle.amplitude * dp * time_factor * size_speed;
    const double two_l2 = 2.0 * oracle.decay_km * oracle.decay_km;
    const double two_r2 = 2.0 * in.rmax * in.rmax;
    const GeoPoint center{in.lon, in.lat};

    std::array<double, kOutputColumns> surge{};
    for (std::size_t s = 0; s < kOutputColumns; ++s) {
        const auto [dx, dy] = offset_km(center, oracle.stations[s]);
        const double d2 = dx * dx + dy * dy;
        double side = 0.0;
        if (d2 > 0.0) {
            // Compass bearing: atan2(east, north).
            const double bearing = std::atan2(dx, dy);
            side = std::sin(bearing - heading) * (1.0 - std::exp(-d2 / two_r2));
        }
        surge[s] = peak * std::exp(-d2 / two_l2) * (1.0 + oracle.asymmetry * side);
    }
    return surge;
}

namespace {

GeoPoint sample_on_polyline(Rng& rng, const std::vector<GeoPoint>& line) {
    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < line.size(); ++i) {
        cumulative.push_back(cumulative.back() + distance_km(line[i - 1], line[i]));
    }
    const double target = rng.uniform() * cumulative.back();
    std::size_t seg = 1;
    while (seg + 1 < line.size() && cumulative[seg] < target) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? (target - cumulative[seg - 1]) / len : 0.0;
    return {line[seg - 1].lon + t * (line[seg].lon - line[seg - 1].lon),
            line[seg - 1].lat + t * (line[seg].lat - line[seg - 1].lat)};
}

}  // namespace

StormTrack generate_track(Rng& rng, const OracleParams& oracle, const TrackSampling& sampling) {
    oracle.validate();
    sampling.validate();
    const GeoPoint landfall = sample_on_polyline(rng, sampling.coast);
    const double fspeed = rng.uniform(sampling.fspeed_min, sampling.fspeed_max);
    const double rmax = rng.uniform(sampling.rmax_min, sampling.rmax_max);
    const double dp0 = rng.uniform(sampling.dp_min, sampling.dp_max);

    const double heading = storm_heading_deg(fspeed, oracle) * kDegToRad;
    const double km_per_day = fspeed * kSecondsPerDay / 1000.0;
    const double east = std::sin(heading) * km_per_day;
    const double north = std::cos(heading) * km_per_day;

    StormTrack track;
    track.rows.reserve(kRowsPerTrack);
    for (std::size_t r = 0; r < kRowsPerTrack; ++r) {
        const double tau = grid_tau(r);
        // Position at tau: landfall point minus tau days of travel.
        const double lon = landfall.lon - tau * east / km_per_deg_lon();
        const double lat = landfall.lat - tau * north / kKmPerDegLat;
        // Pressure deficit holds offshore and fills exponentially over land.
        const double dp = tau >= 0.0 ? dp0 : dp0 * std::exp(tau / sampling.filling_days);
        TrackRow row;
        row.inputs = {tau, lon, lat, rmax, oracle.wind_coefficient * std::sqrt(dp), fspeed};
        row.surge = surge_oracle(row.inputs, oracle);
        track.rows.push_back(row);
    }
    return track;
}

std::vector<StormTrack> generate_corpus(std::size_t n, std::uint64_t seed,
                                        const OracleParams& oracle,
                                        const TrackSampling& sampling) {
    std::vector<StormTrack> tracks;
    tracks.reserve(n);
    const Rng root(seed);
    for (std::size_t k = 0; k < n; ++k) {
        Rng rng = root.child(k);
        auto track = generate_track(rng, oracle, sampling);
        char id[32];
        std::snprintf(id, sizeof id, "track_%04zu", k + 1);
        track.id = id;
        tracks.push_back(std::move(track));
    }
    return tracks;
}

}  // namespace surgenet
