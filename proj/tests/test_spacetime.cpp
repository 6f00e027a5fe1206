#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "entdist/constants.hpp"
#include "entdist/spacetime.hpp"
#include "test_helpers.hpp"

using namespace entdist;

namespace {

SpacetimeEvent event_at(double x, double y, double z, double t) {
    SpacetimeEvent e;
    e.position_km = Vec3{x, y, z};
    e.time_s = t;
    return e;
}

// QRNG parameters of the reference scenario.
QrngParams reference_qrng() {
    QrngParams q;
    q.decision_rate_hz = 5000.0;
    q.output_delay_min_s = 200e-9;
    q.output_delay_max_s = 200e-9;
    return q;
}

PassSample symmetric_sample(double t_s) {
    // Satellite on the x axis, stations placed symmetrically about it so both
    // slant ranges are identical: every margin reduces to a closed form.
    PassSample s;
    s.t_s = t_s;
    s.satellite_pos_km = Vec3{7000.0, 0.0, 0.0};
    const Vec3 st1{6371.0, 300.0, 0.0};
    const double r = norm(s.satellite_pos_km - st1);
    s.range1_km = r;
    s.range2_km = r;
    s.elevation1_deg = 45.0;
    s.elevation2_deg = 45.0;
    return s;
}

}  // namespace

TEST_CASE("interval classification") {
    SUBCASE("coincident events are lightlike with zero margin") {
        const SpacetimeEvent a = event_at(100.0, 200.0, 300.0, 5.0);
        const IntervalResult r = interval_classify(a, a);
        CHECK(r.classification == IntervalClass::lightlike);
        CHECK(r.margin_km == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("pure time separation is timelike with margin -c dt") {
        const IntervalResult r =
            interval_classify(event_at(1.0, 2.0, 3.0, 0.0), event_at(1.0, 2.0, 3.0, 1.0));
        CHECK(r.classification == IntervalClass::timelike);
        CHECK(r.margin_km == doctest::Approx(-kSpeedOfLightKmPerS).epsilon(1e-12));
    }
    SUBCASE("pure space separation is spacelike with margin |dx|") {
        const IntervalResult r =
            interval_classify(event_at(0.0, 0.0, 0.0, 7.0), event_at(300.0, 400.0, 0.0, 7.0));
        CHECK(r.classification == IntervalClass::spacelike);
        CHECK(r.margin_km == doctest::Approx(500.0).epsilon(1e-12));
    }
    SUBCASE("1203 km at 1 ms leaves 903.2 km outside the light cone") {
        const IntervalResult r =
            interval_classify(event_at(0.0, 0.0, 0.0, 0.0), event_at(1203.0, 0.0, 0.0, 1e-3));
        CHECK(r.classification == IntervalClass::spacelike);
        CHECK(r.margin_km == doctest::Approx(903.207542).epsilon(1e-12));
    }
    SUBCASE("classification is symmetric in its arguments") {
        const SpacetimeEvent a = event_at(10.0, -4.0, 2.0, 1.5);
        const SpacetimeEvent b = event_at(-800.0, 90.0, 12.0, 1.5004);
        const IntervalResult ab = interval_classify(a, b);
        const IntervalResult ba = interval_classify(b, a);
        CHECK(ab.classification == ba.classification);
        CHECK(ab.margin_km == doctest::Approx(ba.margin_km).epsilon(1e-15));
    }
    SUBCASE("points on the light cone sit at margin zero to rounding") {
        const IntervalResult r = interval_classify(
            event_at(0.0, 0.0, 0.0, 0.0), event_at(kSpeedOfLightKmPerS, 0.0, 0.0, 1.0));
        CHECK(std::abs(r.margin_km) <= 1e-7);
    }
}

TEST_CASE("event construction for one emission") {
    PassSample sample;
    sample.t_s = 100.0;
    sample.satellite_pos_km = Vec3{6871.0, 0.0, 0.0};
    const Vec3 st1{6371.0, 500.0, 0.0};
    const Vec3 st2{6371.0, -900.0, 0.0};
    sample.range1_km = norm(sample.satellite_pos_km - st1);
    sample.range2_km = norm(sample.satellite_pos_km - st2);
    const double lag = 1e-7, delay = 5e-5;
    const auto events = build_events(sample, st1, st2, delay, lag);

    SUBCASE("labels, positions, and times follow the documented layout") {
        CHECK(events[0].label == EventLabel::S);
        CHECK(events[1].label == EventLabel::R1);
        CHECK(events[2].label == EventLabel::R2);
        CHECK(events[3].label == EventLabel::M1);
        CHECK(events[4].label == EventLabel::M2);
        CHECK(norm(events[0].position_km - sample.satellite_pos_km) == 0.0);
        CHECK(norm(events[1].position_km - st1) == 0.0);
        CHECK(norm(events[3].position_km - st1) == 0.0);
        CHECK(norm(events[2].position_km - st2) == 0.0);
        CHECK(norm(events[4].position_km - st2) == 0.0);
        const double c = kSpeedOfLightKmPerS;
        CHECK(events[3].time_s ==
              doctest::Approx(100.0 + sample.range1_km / c + lag).epsilon(1e-15));
        CHECK(events[4].time_s ==
              doctest::Approx(100.0 + sample.range2_km / c + lag).epsilon(1e-15));
        CHECK(events[1].time_s == doctest::Approx(events[3].time_s - delay).epsilon(1e-15));
        CHECK(events[2].time_s == doctest::Approx(events[4].time_s - delay).epsilon(1e-15));
    }
    SUBCASE("setting and measurement coincide when delay and lag vanish") {
        const auto tight = build_events(sample, st1, st2, 0.0, 0.0);
        CHECK(tight[1].time_s == tight[3].time_s);
        CHECK(interval_classify(tight[1], tight[3]).classification ==
              IntervalClass::lightlike);
    }
    SUBCASE("emission-to-measurement is timelike by exactly the processing lag") {
        const IntervalResult m1s = interval_classify(events[3], events[0]);
        CHECK(m1s.classification == IntervalClass::timelike);
        CHECK(m1s.margin_km ==
              doctest::Approx(-kSpeedOfLightKmPerS * lag).epsilon(1e-6));
    }
    SUBCASE("setting-to-emission margin is c (delay - lag)") {
        for (double d : {1e-6, 5e-5, 2e-4}) {
            const auto ev = build_events(sample, st1, st2, d, lag);
            const IntervalResult r1s = interval_classify(ev[1], ev[0]);
            CHECK(r1s.margin_km ==
                  doctest::Approx(kSpeedOfLightKmPerS * (d - lag)).epsilon(1e-6));
        }
    }
    SUBCASE("negative lag is rejected") {
        CHECK_THROWS_AS(build_events(sample, st1, st2, delay, -1e-9), std::invalid_argument);
    }
}

TEST_CASE("paper delay window membership") {
    CHECK(delay_in_paper_range(0.2e-6));
    CHECK(delay_in_paper_range(200.2e-6));
    CHECK(delay_in_paper_range(5e-5));
    CHECK(!delay_in_paper_range(0.19e-6));
    CHECK(!delay_in_paper_range(0.21e-3));
    CHECK(!delay_in_paper_range(0.0));
}

TEST_CASE("loophole report on the reference pass") {
    const std::vector<PassSample> pass = testutil::reference_pass();
    const Vec3 p1 = station_position(testutil::station1());
    const Vec3 p2 = station_position(testutil::station2());
    const LoopholeReport report = loophole_report(pass, p1, p2, reference_qrng(), 1e-7);

    SUBCASE("every pair is spacelike, in the documented order") {
        const std::array<std::pair<EventLabel, EventLabel>, 6> expect{{
            {EventLabel::R1, EventLabel::R2},
            {EventLabel::R1, EventLabel::M2},
            {EventLabel::M1, EventLabel::R2},
            {EventLabel::M1, EventLabel::M2},
            {EventLabel::R1, EventLabel::S},
            {EventLabel::R2, EventLabel::S},
        }};
        for (int k = 0; k < 6; ++k) {
            CHECK(report.pairs[k].first == expect[k].first);
            CHECK(report.pairs[k].second == expect[k].second);
            CHECK(report.pairs[k].classification == IntervalClass::spacelike);
            CHECK(report.pairs[k].margin_km > 0.0);
        }
    }
    SUBCASE("worst-case margins and their pass times are stable") {
        CHECK(report.pairs[0].margin_km == doctest::Approx(249.49912471611526).epsilon(1e-9));
        CHECK(report.pairs[1].margin_km == doctest::Approx(249.43916622461347).epsilon(1e-9));
        CHECK(report.pairs[2].margin_km == doctest::Approx(266.34285085504257).epsilon(1e-9));
        CHECK(report.pairs[3].margin_km == doctest::Approx(309.4576163162418).epsilon(1e-9));
        CHECK(report.pairs[0].at_t_s == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(report.pairs[2].at_t_s == doctest::Approx(291.0).epsilon(1e-12));
    }
    SUBCASE("receive-to-emission margins equal c (delay_min - lag) analytically") {
        const double expect = kSpeedOfLightKmPerS * (200e-9 - 1e-7);
        CHECK(report.pairs[4].margin_km == doctest::Approx(expect).epsilon(1e-5));
        CHECK(report.pairs[5].margin_km == doctest::Approx(expect).epsilon(1e-5));
    }
    SUBCASE("maximum path difference stays under the one-way budget") {
        CHECK(report.max_path_difference_km ==
              doctest::Approx(897.0003580838631).epsilon(1e-9));
        CHECK(report.max_path_difference_km <= 944.0);
    }
    SUBCASE("R1R2 margin respects the separation-minus-delays lower bound") {
        const double d = norm(p1 - p2);
        const QrngParams q = reference_qrng();
        const double span_s = 1.0 / q.decision_rate_hz + q.output_delay_max_s -
                              q.output_delay_min_s;
        double bound = 1e300;
        for (const PassSample& s : pass) {
            const double dt_prop = std::abs(s.range1_km - s.range2_km) / kSpeedOfLightKmPerS;
            bound = std::min(bound,
                             d - kSpeedOfLightKmPerS * (dt_prop + span_s));
        }
        CHECK(report.pairs[0].margin_km >= bound - 1e-6);
        CHECK(report.pairs[0].margin_km <= d);
    }
    SUBCASE("earth-rotation caveat matches the arc-length estimate") {
        const double duration = pass.back().t_s - pass.front().t_s;
        const double cos_lat =
            std::cos(26.693930555555557 * 3.14159265358979323846 / 180.0);
        const double expect = 7.2921159e-5 * kEarthRadiusKm * cos_lat * duration;
        CHECK(report.earth_rotation_error_km == doctest::Approx(expect).epsilon(1e-6));
        CHECK(report.earth_rotation_error_km == doctest::Approx(118.70865260793948).epsilon(1e-9));
        REQUIRE(report.assumptions.size() >= 3);
        bool mentions_delay = false;
        for (const std::string& a : report.assumptions) {
            mentions_delay = mentions_delay || a.find("QRNG period") != std::string::npos;
        }
        CHECK(mentions_delay);
    }
}

TEST_CASE("dense delay grid agrees with the endpoint evaluation") {
    const std::vector<PassSample> pass = testutil::reference_pass();
    const Vec3 p1 = station_position(testutil::station1());
    const Vec3 p2 = station_position(testutil::station2());
    const LoopholeReport fast = loophole_report(pass, p1, p2, reference_qrng(), 1e-7);
    const LoopholeReport dense =
        loophole_report_dense(pass, p1, p2, reference_qrng(), 1e-7, 7);
    for (int k = 0; k < 6; ++k) {
        CHECK(dense.pairs[k].classification == fast.pairs[k].classification);
        CHECK(dense.pairs[k].margin_km ==
              doctest::Approx(fast.pairs[k].margin_km).epsilon(1e-9));
    }
    CHECK_THROWS_AS(loophole_report_dense(pass, p1, p2, reference_qrng(), 1e-7, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(loophole_report({}, p1, p2, reference_qrng(), 1e-7),
                    std::invalid_argument);
}

TEST_CASE("equidistant geometry reduces every margin to a closed form") {
    std::vector<PassSample> pass = {symmetric_sample(0.0), symmetric_sample(1.0),
                                    symmetric_sample(2.0)};
    const Vec3 st1{6371.0, 300.0, 0.0};
    const Vec3 st2{6371.0, -300.0, 0.0};
    QrngParams q;
    q.decision_rate_hz = 5000.0;
    q.output_delay_min_s = 0.2e-6;
    q.output_delay_max_s = 200e-6;
    const double lo = q.output_delay_min_s;
    const double hi = 1.0 / q.decision_rate_hz + q.output_delay_max_s;
    const double c = kSpeedOfLightKmPerS;
    const LoopholeReport report = loophole_report(pass, st1, st2, q, 0.0);

    CHECK(report.max_path_difference_km == doctest::Approx(0.0).epsilon(1e-15));
    // Equal ranges: R1R2 separation is fixed at 600 km and the only time
    // difference is the delay mismatch, worst at the full interval width.
    CHECK(report.pairs[0].margin_km == doctest::Approx(600.0 - c * (hi - lo)).epsilon(1e-9));
    // Setting-to-remote-measurement sees exactly one delay.
    CHECK(report.pairs[1].margin_km == doctest::Approx(600.0 - c * hi).epsilon(1e-9));
    CHECK(report.pairs[2].margin_km == doctest::Approx(600.0 - c * hi).epsilon(1e-9));
    // Simultaneous measurements at distance D.
    CHECK(report.pairs[3].margin_km == doctest::Approx(600.0).epsilon(1e-9));
    // Receive-to-emission margin is c * delay_min at zero lag.
    CHECK(report.pairs[4].margin_km == doctest::Approx(c * lo).epsilon(1e-9));
    CHECK(report.pairs[5].margin_km == doctest::Approx(c * lo).epsilon(1e-9));
    for (int k = 0; k < 6; ++k) {
        CHECK(report.pairs[k].classification == IntervalClass::spacelike);
    }
}
