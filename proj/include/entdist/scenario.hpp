#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "entdist/eventsim.hpp"
#include "entdist/geometry.hpp"
#include "entdist/linkbudget.hpp"
#include "entdist/quantum.hpp"

namespace entdist {

// Complete experiment description, loaded from a versioned JSON file.
// Unknown keys are configuration errors; keys beginning with "_" are
// reserved for human-readable comments and ignored.
struct Scenario {
    int schema_version = 1;
    std::string name;
    std::uint64_t seed = 1;
    std::int64_t window_ps = 2500;

    bool has_orbit = false;
    OrbitModel orbit{};
    std::string ephemeris_csv;  // alternative to orbit

    double pass_dt_s = 1.0;
    double cutoff_elevation_deg = 10.0;

    std::array<GroundStation, 2> stations{};
    std::array<LinkParams, 2> links{};
    SourceParams source{};
    std::array<DetectorParams, 4> detectors{};  // st1 "+", st1 "-", st2 "+", st2 "-"
    std::array<QrngParams, 2> qrng{};
    std::array<ClockModel, 2> clocks{};

    std::vector<double> bell_angles1_rad;
    std::vector<double> bell_angles2_rad;
    std::vector<double> fidelity_angles1_rad;
    std::vector<double> fidelity_angles2_rad;

    int handedness_sign = 0;  // +1 or -1; 0 = calibrate to maximize ideal S

    double slice_s = 0.25;
    bool parallel = true;
    double measurement_lag_s = 1e-7;
};

// Throws std::runtime_error naming the offending key or field.
Scenario load_scenario(const std::string& path);
void validate(const Scenario& scenario);

}  // namespace entdist
