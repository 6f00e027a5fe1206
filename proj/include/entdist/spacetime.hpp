#pragma once

#include <array>
#include <string>
#include <vector>

#include "entdist/eventsim.hpp"
#include "entdist/geometry.hpp"
#include "entdist/vec3.hpp"

namespace entdist {

enum class EventLabel { S, R1, R2, M1, M2 };

// An event in the non-rotating Earth-centered frame used for the pass.
struct SpacetimeEvent {
    EventLabel label = EventLabel::S;
    Vec3 position_km{};
    double time_s = 0.0;
};

enum class IntervalClass { spacelike, timelike, lightlike };

// margin = |dx| - c|dt| in km; positive for spacelike, negative for timelike.
struct IntervalResult {
    IntervalClass classification = IntervalClass::lightlike;
    double margin_km = 0.0;
};

IntervalResult interval_classify(const SpacetimeEvent& a, const SpacetimeEvent& b);

const char* to_string(EventLabel label);
const char* to_string(IntervalClass c);

// The five events of one emission: S at the satellite at sample time,
// M_i at station i at t_S + range_i/c + lag, R_i at station i at t(M_i) - delay.
// Delays outside [0.2, 200.2] us are flagged by delay_in_paper_range, not an error.
std::array<SpacetimeEvent, 5> build_events(const PassSample& sample, const Vec3& station1_km,
                                           const Vec3& station2_km, double qrng_delay_s,
                                           double lag_s);

bool delay_in_paper_range(double delay_s);

// Worst case (minimum margin) for one event pair over the pass and the
// setting-to-measurement delay range.
struct PairMargin {
    EventLabel first = EventLabel::S;
    EventLabel second = EventLabel::S;
    IntervalClass classification = IntervalClass::lightlike;
    double margin_km = 0.0;
    double at_t_s = 0.0;  // pass time attaining the minimum
};

struct LoopholeReport {
    std::array<PairMargin, 6> pairs{};  // R1R2, R1M2, M1R2, M1M2, R1S, R2S
    double max_path_difference_km = 0.0;
    double earth_rotation_error_km = 0.0;  // positional error of the fixed-station assumption
    std::vector<std::string> assumptions;
};

// The R_i-to-M_i delay spans [output_delay_min, 1/decision_rate + output_delay_max]:
// a basis choice applies from its activation until the next one, so the age of
// the active choice at measurement time covers one full QRNG period plus the
// output delay. Worst cases are evaluated at the delay-interval endpoints per
// station (margins are monotone in each delay); see the dense-grid variant.
LoopholeReport loophole_report(const std::vector<PassSample>& pass, const Vec3& station1_km,
                               const Vec3& station2_km, const QrngParams& qrng, double lag_s);

// Cross-check scanning an n_grid x n_grid delay grid per sample instead of
// endpoints only.
LoopholeReport loophole_report_dense(const std::vector<PassSample>& pass, const Vec3& station1_km,
                                     const Vec3& station2_km, const QrngParams& qrng, double lag_s,
                                     int n_grid);

}  // namespace entdist
