#include "entdist/scenario.hpp"

#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "entdist/io.hpp"

namespace entdist {

namespace {

using nlohmann::json;

// Unknown keys are configuration errors; "_"-prefixed keys carry citations
// and comments and are ignored everywhere.
void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!key.empty() && key[0] == '_') continue;
        if (allowed.find(key) == allowed.end()) {
            throw std::runtime_error("scenario: unknown key '" + key + "' in " + where);
        }
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw std::runtime_error("scenario: missing key '" + key + "' in " + where);
    }
    return *it;
}

double num(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) {
        throw std::runtime_error("scenario: key '" + key + "' in " + where + " must be a number");
    }
    return v.get<double>();
}

double num_or(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (obj.find(key) == obj.end()) return fallback;
    return num(obj, key, where);
}

std::vector<double> num_list(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_array() || v.empty()) {
        throw std::runtime_error("scenario: key '" + key + "' in " + where +
                                 " must be a nonempty array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) {
            throw std::runtime_error("scenario: key '" + key + "' in " + where +
                                     " must contain only numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

GroundStation parse_station(const json& obj, const std::string& where) {
    check_keys(obj, {"name", "latitude_deg", "longitude_deg", "altitude_km"}, where);
    GroundStation s;
    s.name = require(obj, "name", where).get<std::string>();
    s.latitude_deg = num(obj, "latitude_deg", where);
    s.longitude_deg = num(obj, "longitude_deg", where);
    s.altitude_km = num(obj, "altitude_km", where);
    return s;
}

LinkParams parse_link(const json& obj, const std::string& where) {
    check_keys(obj,
               {"divergence_full_angle_rad", "tx_optics_efficiency", "rx_aperture_diameter_m",
                "rx_optics_efficiency", "detector_efficiency", "pointing_jitter_sigma_rad",
                "zenith_atmospheric_transmission", "filter_transmission"},
               where);
    LinkParams p;
    p.divergence_full_angle_rad = num(obj, "divergence_full_angle_rad", where);
    p.tx_optics_efficiency = num(obj, "tx_optics_efficiency", where);
    p.rx_aperture_diameter_m = num(obj, "rx_aperture_diameter_m", where);
    p.rx_optics_efficiency = num(obj, "rx_optics_efficiency", where);
    p.detector_efficiency = num(obj, "detector_efficiency", where);
    p.pointing_jitter_sigma_rad = num(obj, "pointing_jitter_sigma_rad", where);
    p.zenith_atmospheric_transmission = num(obj, "zenith_atmospheric_transmission", where);
    p.filter_transmission = num(obj, "filter_transmission", where);
    return p;
}

DetectorParams parse_detector(const json& obj, const std::string& where) {
    check_keys(obj, {"efficiency", "dark_rate_hz", "background_rate_hz", "time_jitter_sigma_ps"},
               where);
    DetectorParams d;
    d.efficiency = num(obj, "efficiency", where);
    d.dark_rate_hz = num(obj, "dark_rate_hz", where);
    d.background_rate_hz = num(obj, "background_rate_hz", where);
    d.time_jitter_sigma_ps = num(obj, "time_jitter_sigma_ps", where);
    return d;
}

QrngParams parse_qrng(const json& obj, const std::string& where) {
    check_keys(obj, {"decision_rate_hz", "output_delay_min_s", "output_delay_max_s"}, where);
    QrngParams q;
    q.decision_rate_hz = num(obj, "decision_rate_hz", where);
    q.output_delay_min_s = num(obj, "output_delay_min_s", where);
    q.output_delay_max_s = num(obj, "output_delay_max_s", where);
    return q;
}

ClockModel parse_clock(const json& obj, const std::string& where) {
    check_keys(obj,
               {"offset_ps", "drift_ps_per_s", "sync_pulse_rate_hz", "sync_jitter_sigma_ps"},
               where);
    ClockModel c;
    c.offset_ps = num(obj, "offset_ps", where);
    c.drift_ps_per_s = num(obj, "drift_ps_per_s", where);
    c.sync_pulse_rate_hz = num(obj, "sync_pulse_rate_hz", where);
    c.sync_jitter_sigma_ps = num(obj, "sync_jitter_sigma_ps", where);
    return c;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    json root;
    try {
        root = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!root.is_object()) {
        throw std::runtime_error(path + ": scenario must be a JSON object");
    }
    check_keys(root,
               {"schema_version", "name", "seed", "window_ps", "orbit", "ephemeris_csv", "pass",
                "stations", "links", "source", "detectors", "qrng", "clocks", "angles",
                "handedness_sign", "sim", "spacetime"},
               "scenario");

    Scenario sc;
    sc.schema_version = require(root, "schema_version", "scenario").get<int>();
    if (sc.schema_version != 1) {
        throw std::runtime_error("scenario: unsupported schema_version " +
                                 std::to_string(sc.schema_version));
    }
    sc.name = require(root, "name", "scenario").get<std::string>();
    sc.seed = require(root, "seed", "scenario").get<std::uint64_t>();
    sc.window_ps = require(root, "window_ps", "scenario").get<std::int64_t>();

    const bool has_orbit = root.find("orbit") != root.end();
    const bool has_ephemeris = root.find("ephemeris_csv") != root.end();
    if (has_orbit == has_ephemeris) {
        throw std::runtime_error("scenario: exactly one of 'orbit' or 'ephemeris_csv' required");
    }
    if (has_orbit) {
        const json& o = root["orbit"];
        check_keys(o,
                   {"altitude_km", "speed_km_s", "track_point_lat_deg", "track_point_lon_deg",
                    "track_azimuth_deg", "epoch_s"},
                   "orbit");
        sc.has_orbit = true;
        sc.orbit.altitude_km = num(o, "altitude_km", "orbit");
        sc.orbit.speed_km_s = num(o, "speed_km_s", "orbit");
        sc.orbit.track_point_lat_deg = num(o, "track_point_lat_deg", "orbit");
        sc.orbit.track_point_lon_deg = num(o, "track_point_lon_deg", "orbit");
        sc.orbit.track_azimuth_deg = num(o, "track_azimuth_deg", "orbit");
        sc.orbit.epoch_s = num(o, "epoch_s", "orbit");
    } else {
        sc.ephemeris_csv = root["ephemeris_csv"].get<std::string>();
    }

    if (root.find("pass") != root.end()) {
        const json& p = root["pass"];
        check_keys(p, {"dt_s", "cutoff_elevation_deg"}, "pass");
        sc.pass_dt_s = num_or(p, "dt_s", "pass", sc.pass_dt_s);
        sc.cutoff_elevation_deg = num_or(p, "cutoff_elevation_deg", "pass",
                                         sc.cutoff_elevation_deg);
    }

    const json& stations = require(root, "stations", "scenario");
    if (!stations.is_array() || stations.size() != 2) {
        throw std::runtime_error("scenario: 'stations' must be an array of exactly 2 entries");
    }
    sc.stations[0] = parse_station(stations[0], "stations[0]");
    sc.stations[1] = parse_station(stations[1], "stations[1]");

    const json& links = require(root, "links", "scenario");
    if (!links.is_array() || links.size() != 2) {
        throw std::runtime_error("scenario: 'links' must be an array of exactly 2 entries");
    }
    sc.links[0] = parse_link(links[0], "links[0]");
    sc.links[1] = parse_link(links[1], "links[1]");

    const json& source = require(root, "source", "scenario");
    check_keys(source, {"pair_rate_hz", "target_fidelity", "onboard_sampling_fraction_per_arm"},
               "source");
    sc.source.pair_rate_hz = num(source, "pair_rate_hz", "source");
    sc.source.target_fidelity = num(source, "target_fidelity", "source");
    sc.source.onboard_sampling_fraction_per_arm =
        num(source, "onboard_sampling_fraction_per_arm", "source");

    const json& detectors = require(root, "detectors", "scenario");
    if (!detectors.is_array() || detectors.size() != 4) {
        throw std::runtime_error("scenario: 'detectors' must be an array of exactly 4 entries");
    }
    for (int i = 0; i < 4; ++i) {
        sc.detectors[i] = parse_detector(detectors[i], "detectors[" + std::to_string(i) + "]");
    }

    const json& qrng = require(root, "qrng", "scenario");
    if (!qrng.is_array() || qrng.size() != 2) {
        throw std::runtime_error("scenario: 'qrng' must be an array of exactly 2 entries");
    }
    sc.qrng[0] = parse_qrng(qrng[0], "qrng[0]");
    sc.qrng[1] = parse_qrng(qrng[1], "qrng[1]");

    const json& clocks = require(root, "clocks", "scenario");
    if (!clocks.is_array() || clocks.size() != 2) {
        throw std::runtime_error("scenario: 'clocks' must be an array of exactly 2 entries");
    }
    sc.clocks[0] = parse_clock(clocks[0], "clocks[0]");
    sc.clocks[1] = parse_clock(clocks[1], "clocks[1]");

    const json& angles = require(root, "angles", "scenario");
    check_keys(angles,
               {"bell_station1_rad", "bell_station2_rad", "fidelity_station1_rad",
                "fidelity_station2_rad"},
               "angles");
    sc.bell_angles1_rad = num_list(angles, "bell_station1_rad", "angles");
    sc.bell_angles2_rad = num_list(angles, "bell_station2_rad", "angles");
    sc.fidelity_angles1_rad = num_list(angles, "fidelity_station1_rad", "angles");
    sc.fidelity_angles2_rad = num_list(angles, "fidelity_station2_rad", "angles");

    if (root.find("handedness_sign") != root.end()) {
        sc.handedness_sign = root["handedness_sign"].get<int>();
    }

    if (root.find("sim") != root.end()) {
        const json& sim = root["sim"];
        check_keys(sim, {"slice_s", "parallel"}, "sim");
        sc.slice_s = num_or(sim, "slice_s", "sim", sc.slice_s);
        if (sim.find("parallel") != sim.end()) sc.parallel = sim["parallel"].get<bool>();
    }

    if (root.find("spacetime") != root.end()) {
        const json& st = root["spacetime"];
        check_keys(st, {"measurement_lag_s"}, "spacetime");
        sc.measurement_lag_s = num_or(st, "measurement_lag_s", "spacetime", sc.measurement_lag_s);
    }

    validate(sc);
    return sc;
}

void validate(const Scenario& scenario) {
    validate(scenario.stations[0]);
    validate(scenario.stations[1]);
    if (scenario.has_orbit) validate(scenario.orbit);
    validate(scenario.links[0]);
    validate(scenario.links[1]);
    validate(scenario.source);
    for (const DetectorParams& d : scenario.detectors) validate(d);
    for (const QrngParams& q : scenario.qrng) validate(q);
    for (const ClockModel& c : scenario.clocks) validate(c);
    if (!(scenario.window_ps > 0)) {
        throw std::runtime_error("scenario: window_ps must be > 0");
    }
    if (!(scenario.pass_dt_s > 0.0)) {
        throw std::runtime_error("scenario: pass dt_s must be > 0");
    }
    if (!(scenario.cutoff_elevation_deg >= 0.0 && scenario.cutoff_elevation_deg < 90.0)) {
        throw std::runtime_error("scenario: cutoff_elevation_deg must lie in [0, 90)");
    }
    if (!(scenario.slice_s > 0.0)) {
        throw std::runtime_error("scenario: sim slice_s must be > 0");
    }
    if (scenario.handedness_sign != 0 && scenario.handedness_sign != 1 &&
        scenario.handedness_sign != -1) {
        throw std::runtime_error("scenario: handedness_sign must be -1, 0 (auto) or +1");
    }
    if (!(scenario.measurement_lag_s >= 0.0)) {
        throw std::runtime_error("scenario: measurement_lag_s must be >= 0");
    }
}

}  // namespace entdist
