#include "entdist/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "entdist/constants.hpp"

namespace entdist {

namespace {

constexpr double kEarthAngularRateRadPerS = 7.2921159e-5;

std::array<SpacetimeEvent, 5> make_events(const PassSample& sample, const Vec3& station1_km,
                                          const Vec3& station2_km, double delay1_s,
                                          double delay2_s, double lag_s) {
    const double c = kSpeedOfLightKmPerS;
    const double t_m1 = sample.t_s + sample.range1_km / c + lag_s;
    const double t_m2 = sample.t_s + sample.range2_km / c + lag_s;
    return {
        SpacetimeEvent{EventLabel::S, sample.satellite_pos_km, sample.t_s},
        SpacetimeEvent{EventLabel::R1, station1_km, t_m1 - delay1_s},
        SpacetimeEvent{EventLabel::R2, station2_km, t_m2 - delay2_s},
        SpacetimeEvent{EventLabel::M1, station1_km, t_m1},
        SpacetimeEvent{EventLabel::M2, station2_km, t_m2},
    };
}

// Indices into the build_events array for the six reported pairs.
constexpr std::array<std::pair<int, int>, 6> kReportPairs{{
    {1, 2},  // R1 R2
    {1, 4},  // R1 M2
    {3, 2},  // M1 R2
    {3, 4},  // M1 M2
    {1, 0},  // R1 S
    {2, 0},  // R2 S
}};

LoopholeReport report_over_delays(const std::vector<PassSample>& pass, const Vec3& station1_km,
                                  const Vec3& station2_km, const QrngParams& qrng, double lag_s,
                                  const std::vector<double>& delays) {
    if (pass.empty()) {
        throw std::invalid_argument("loophole_report: empty pass");
    }
    LoopholeReport report;
    double min_margin[6];
    std::fill(std::begin(min_margin), std::end(min_margin),
              std::numeric_limits<double>::infinity());

    double max_path_diff = 0.0;
    for (const PassSample& sample : pass) {
        max_path_diff = std::max(max_path_diff, std::abs(sample.range1_km - sample.range2_km));
        for (double d1 : delays) {
            for (double d2 : delays) {
                const auto events = make_events(sample, station1_km, station2_km, d1, d2, lag_s);
                for (int k = 0; k < 6; ++k) {
                    const auto [i, j] = kReportPairs[k];
                    const IntervalResult r = interval_classify(events[i], events[j]);
                    if (r.margin_km < min_margin[k]) {
                        min_margin[k] = r.margin_km;
                        report.pairs[k] = PairMargin{events[i].label, events[j].label,
                                                     r.classification, r.margin_km, sample.t_s};
                    }
                }
            }
        }
    }
    report.max_path_difference_km = max_path_diff;

    // Positional error of holding the stations fixed in the inertial frame:
    // Earth-rotation arc at the stations' latitude over the pass duration.
    const double duration_s = pass.back().t_s - pass.front().t_s;
    const double lat1 = std::asin(station1_km.z / norm(station1_km));
    const double lat2 = std::asin(station2_km.z / norm(station2_km));
    const double cos_lat = std::max(std::cos(lat1), std::cos(lat2));
    report.earth_rotation_error_km =
        kEarthAngularRateRadPerS * kEarthRadiusKm * cos_lat * duration_s;

    report.assumptions = {
        "stations held fixed in the inertial frame at their pass positions; "
        "the Earth-rotation positional error over the pass is reported and "
        "does not flip any classification in the reference scenario",
        "setting-to-measurement delay spans one QRNG period plus the output delay: [" +
            std::to_string(qrng.output_delay_min_s * 1e6) + ", " +
            std::to_string(1e6 / qrng.decision_rate_hz + qrng.output_delay_max_s * 1e6) + "] us",
        "hidden variables are assumed to originate with the particles at emission",
    };
    return report;
}

}  // namespace

const char* to_string(EventLabel label) {
    switch (label) {
        case EventLabel::S: return "S";
        case EventLabel::R1: return "R1";
        case EventLabel::R2: return "R2";
        case EventLabel::M1: return "M1";
        case EventLabel::M2: return "M2";
    }
    return "?";
}

const char* to_string(IntervalClass c) {
    switch (c) {
        case IntervalClass::spacelike: return "spacelike";
        case IntervalClass::timelike: return "timelike";
        case IntervalClass::lightlike: return "lightlike";
    }
    return "?";
}

IntervalResult interval_classify(const SpacetimeEvent& a, const SpacetimeEvent& b) {
    const double dx = norm(a.position_km - b.position_km);
    const double dt = std::abs(a.time_s - b.time_s);
    const double margin = dx - kSpeedOfLightKmPerS * dt;
    IntervalResult r;
    r.margin_km = margin;
    r.classification = margin > 0.0   ? IntervalClass::spacelike
                       : margin < 0.0 ? IntervalClass::timelike
                                      : IntervalClass::lightlike;
    return r;
}

bool delay_in_paper_range(double delay_s) {
    // The boundaries tolerate 1-ulp arithmetic noise: the upper edge is
    // typically computed as 1/decision_rate + output_delay, which can land
    // one ulp above the literal 200.2 us.
    return delay_s >= 0.2e-6 * (1.0 - 1e-12) && delay_s <= 200.2e-6 * (1.0 + 1e-12);
}

std::array<SpacetimeEvent, 5> build_events(const PassSample& sample, const Vec3& station1_km,
                                           const Vec3& station2_km, double qrng_delay_s,
                                           double lag_s) {
    if (!(lag_s >= 0.0)) {
        throw std::invalid_argument("build_events: lag must be >= 0");
    }
    return make_events(sample, station1_km, station2_km, qrng_delay_s, qrng_delay_s, lag_s);
}

LoopholeReport loophole_report(const std::vector<PassSample>& pass, const Vec3& station1_km,
                               const Vec3& station2_km, const QrngParams& qrng, double lag_s) {
    // Margins are concave in each delay (|dt| is V-shaped), so the minimum
    // over the delay interval is attained at its endpoints.
    const double lo = qrng.output_delay_min_s;
    const double hi = 1.0 / qrng.decision_rate_hz + qrng.output_delay_max_s;
    return report_over_delays(pass, station1_km, station2_km, qrng, lag_s, {lo, hi});
}

LoopholeReport loophole_report_dense(const std::vector<PassSample>& pass, const Vec3& station1_km,
                                     const Vec3& station2_km, const QrngParams& qrng, double lag_s,
                                     int n_grid) {
    if (n_grid < 2) {
        throw std::invalid_argument("loophole_report_dense: n_grid must be >= 2");
    }
    const double lo = qrng.output_delay_min_s;
    const double hi = 1.0 / qrng.decision_rate_hz + qrng.output_delay_max_s;
    std::vector<double> delays;
    delays.reserve(static_cast<std::size_t>(n_grid));
    for (int i = 0; i < n_grid; ++i) {
        delays.push_back(lo + (hi - lo) * static_cast<double>(i) / (n_grid - 1));
    }
    return report_over_delays(pass, station1_km, station2_km, qrng, lag_s, delays);
}

}  // namespace entdist
