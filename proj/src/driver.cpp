#include "entdist/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "entdist/constants.hpp"

namespace entdist {

namespace {

using nlohmann::json;

double mean_range_km(const std::vector<PassSample>& pass, int which) {
    double sum = 0.0;
    for (const PassSample& s : pass) sum += (which == 1) ? s.range1_km : s.range2_km;
    return sum / static_cast<double>(pass.size());
}

json fit_to_json(const SyncFit& fit) {
    return json{{"offset_ps", fit.offset_ps},
                {"drift_ps_per_s", fit.drift_ps_per_s},
                {"residual_rms_ps", fit.residual_rms_ps}};
}

json setting_to_json(const SettingCounts& c) {
    return json{{"angle1_rad", c.angle1_rad}, {"angle2_rad", c.angle2_rad}, {"n_pp", c.n_pp},
                {"n_pm", c.n_pm},             {"n_mp", c.n_mp},             {"n_mm", c.n_mm},
                {"total", c.total()}};
}

// Span of a sorted tag stream in seconds; sync pulses cover the whole run,
// so this recovers the simulated duration to within one sync period.
double tag_span_s(const std::vector<TimeTag>& tags) {
    if (tags.size() < 2) return 0.0;
    return static_cast<double>(tags.back().time_ps - tags.front().time_ps) / kPsPerSecond;
}

std::int64_t count_detector_tags(const std::vector<TimeTag>& tags) {
    return std::count_if(tags.begin(), tags.end(),
                         [](const TimeTag& t) { return t.channel != 2; });
}

}  // namespace

PassOutputs compute_pass(const Scenario& scenario) {
    PassOutputs out;
    if (scenario.has_orbit) {
        out.pass = propagate_pass(scenario.orbit, scenario.stations[0], scenario.stations[1],
                                  scenario.pass_dt_s, scenario.cutoff_elevation_deg);
    } else {
        out.pass = load_ephemeris(scenario.ephemeris_csv);
    }
    if (out.pass.empty()) {
        throw std::runtime_error(
            "pass: satellite never rises above the elevation cutoff at both stations");
    }
    out.attenuation = two_downlink_attenuation(out.pass, scenario.links[0], scenario.links[1]);
    return out;
}

SimulationOutputs run_simulation(const Scenario& scenario, const PassOutputs& pass, SimMode mode,
                                 std::optional<std::uint64_t> seed_override) {
    if (pass.pass.empty()) throw std::invalid_argument("run_simulation: empty pass");

    SimulationOutputs out;
    const TwoQubitState state = make_werner(scenario.source.target_fidelity);
    out.handedness_sign = (scenario.handedness_sign != 0) ? scenario.handedness_sign
                                                          : calibrate_handedness(state);

    SimConfig cfg;
    cfg.t_start_s = pass.pass.front().t_s;
    cfg.t_end_s = pass.pass.back().t_s;
    cfg.slice_s = scenario.slice_s;
    cfg.pair_rate_hz = scenario.source.pair_rate_hz;
    cfg.state = state;
    cfg.handedness_sign = out.handedness_sign;
    cfg.seed = seed_override.value_or(scenario.seed);
    cfg.parallel = scenario.parallel;

    for (int st = 0; st < 2; ++st) {
        StationConfig& station = cfg.stations[st];
        station.detectors[0] = scenario.detectors[2 * st];
        station.detectors[1] = scenario.detectors[2 * st + 1];
        station.qrng = scenario.qrng[st];
        station.clock = scenario.clocks[st];
        if (mode == SimMode::bell) {
            station.angles_rad =
                (st == 0) ? scenario.bell_angles1_rad : scenario.bell_angles2_rad;
        } else {
            station.angles_rad =
                (st == 0) ? scenario.fidelity_angles1_rad : scenario.fidelity_angles2_rad;
        }
        station.propagation_delay_ps =
            mean_range_km(pass.pass, st + 1) / kSpeedOfLightKmPerS * kPsPerSecond;
    }

    cfg.loss_t_s.clear();
    cfg.loss1_db.clear();
    cfg.loss2_db.clear();
    for (const AttenuationSample& a : pass.attenuation) {
        cfg.loss_t_s.push_back(a.t_s);
        cfg.loss1_db.push_back(a.loss1_db);
        cfg.loss2_db.push_back(a.loss2_db);
    }

    out.detection = simulate_pass(cfg);
    out.duration_s = cfg.t_end_s - cfg.t_start_s;

    double min_total = pass.attenuation.front().total_db;
    double max_total = min_total;
    for (const AttenuationSample& a : pass.attenuation) {
        min_total = std::min(min_total, a.total_db);
        max_total = std::max(max_total, a.total_db);
    }

    out.manifest = json{
        {"scenario", scenario.name},
        {"mode", mode == SimMode::bell ? "bell" : "fidelity"},
        {"seed", cfg.seed},
        {"handedness_sign", out.handedness_sign},
        {"t_start_s", cfg.t_start_s},
        {"t_end_s", cfg.t_end_s},
        {"duration_s", out.duration_s},
        {"slice_s", cfg.slice_s},
        {"parallel", cfg.parallel},
        {"pair_rate_hz", cfg.pair_rate_hz},
        {"source_fidelity", scenario.source.target_fidelity},
        {"exact_state_fidelity", exact_fidelity(state)},
        {"angles_station1_rad", cfg.stations[0].angles_rad},
        {"angles_station2_rad", cfg.stations[1].angles_rad},
        {"propagation_delay1_ps", cfg.stations[0].propagation_delay_ps},
        {"propagation_delay2_ps", cfg.stations[1].propagation_delay_ps},
        {"attenuation_min_total_db", min_total},
        {"attenuation_max_total_db", max_total},
        {"n_tags_station1", out.detection.tags1.size()},
        {"n_tags_station2", out.detection.tags2.size()},
        {"n_truth_pairs", out.detection.truth.size()},
        {"window_ps", scenario.window_ps},
    };
    return out;
}

AnalysisOutputs analyze_tags(const std::vector<TimeTag>& tags1, const std::vector<TimeTag>& tags2,
                             std::int64_t window_ps, AnalysisMode mode,
                             const std::vector<double>& angles1_rad,
                             const std::vector<double>& angles2_rad, int bootstrap_reps,
                             std::uint64_t bootstrap_seed) {
    AnalysisOutputs out;

    // Empty inputs are a valid rates query (0 Hz over no time); the estimator
    // modes need coincidences and fail below in the clock fit.
    if (mode == AnalysisMode::rates && tags1.empty() && tags2.empty()) {
        out.result = json{{"mode", "rates"},
                          {"clock_fit", fit_to_json(out.fit)},
                          {"window_ps", window_ps},
                          {"n_coincidences", 0},
                          {"effective_time_s", 0.0},
                          {"total_count", 0},
                          {"total_rate_hz", 0.0},
                          {"per_setting", json::array()}};
        return out;
    }

    out.fit = fit_clock(filter_sync_tags(tags1), filter_sync_tags(tags2));
    out.records = match_coincidences(tags1, tags2, out.fit, window_ps);

    json result;
    result["clock_fit"] = fit_to_json(out.fit);
    result["window_ps"] = window_ps;
    result["n_coincidences"] = out.records.size();

    if (mode == AnalysisMode::bell) {
        result["mode"] = "bell";
        const std::array<SettingCounts, 4> settings =
            collect_chsh_counts(out.records, angles1_rad, angles2_rad);
        const BellResult bell = chsh(settings);
        json per_setting = json::array();
        for (int i = 0; i < 4; ++i) {
            json s = setting_to_json(settings[i]);
            s["e"] = bell.e[i];
            s["sigma_e"] = bell.sigma_e[i];
            per_setting.push_back(std::move(s));
        }
        result["settings"] = std::move(per_setting);
        result["s"] = bell.s;
        result["sigma_s"] = bell.sigma_s;
        result["violation_sigmas"] = bell.violation_sigmas;
        if (bootstrap_reps > 0) {
            result["bootstrap_sigma_s"] =
                bootstrap_sigma_s(settings, bootstrap_reps, bootstrap_seed);
            result["bootstrap_reps"] = bootstrap_reps;
        }
    } else if (mode == AnalysisMode::fidelity) {
        result["mode"] = "fidelity";
        const auto [counts_hv, counts_diag] =
            collect_fidelity_counts(out.records, angles1_rad, angles2_rad);
        const auto [f_low, sigma_f] = fidelity_lower_bound(counts_hv, counts_diag);
        const double n_hv = static_cast<double>(counts_hv.total());
        result["counts_hv"] = setting_to_json(counts_hv);
        result["counts_diag"] = setting_to_json(counts_diag);
        result["populations"] = json{{"p_hh", counts_hv.n_pp / n_hv},
                                     {"p_hv", counts_hv.n_pm / n_hv},
                                     {"p_vh", counts_hv.n_mp / n_hv},
                                     {"p_vv", counts_hv.n_mm / n_hv}};
        result["visibility_diag"] = visibility(counts_diag);
        result["fidelity_lower_bound"] = f_low;
        result["sigma_fidelity"] = sigma_f;
        result["entanglement_certified_sigmas"] = (f_low - 0.5) / sigma_f;
    } else {
        result["mode"] = "rates";
        const double span_s = tag_span_s(tags1);
        const RateReport report = coincidence_rate_report(out.records, span_s);
        result["effective_time_s"] = report.effective_time_s;
        result["total_count"] = report.total_count;
        result["total_rate_hz"] = report.total_rate_hz;
        json per_setting = json::array();
        for (const auto& [key, count] : report.per_setting) {
            per_setting.push_back(
                json{{"basis1", key.first}, {"basis2", key.second}, {"count", count}});
        }
        result["per_setting"] = std::move(per_setting);
        if (span_s > 0.0) {
            const double s1 =
                static_cast<double>(count_detector_tags(tags1)) / span_s;
            const double s2 =
                static_cast<double>(count_detector_tags(tags2)) / span_s;
            result["singles1_hz"] = s1;
            result["singles2_hz"] = s2;
            // the matcher accepts |dt| <= window, a 2*window-wide interval
            result["accidental_rate_hz"] =
                accidental_rate(s1, s2, 2.0 * static_cast<double>(window_ps));
        }
    }
    out.result = std::move(result);
    return out;
}

json loophole_report_to_json(const LoopholeReport& report) {
    json pairs = json::array();
    for (const PairMargin& p : report.pairs) {
        pairs.push_back(json{{"first", to_string(p.first)},
                             {"second", to_string(p.second)},
                             {"classification", to_string(p.classification)},
                             {"margin_km", p.margin_km},
                             {"at_t_s", p.at_t_s}});
    }
    return json{{"pairs", std::move(pairs)},
                {"max_path_difference_km", report.max_path_difference_km},
                {"earth_rotation_error_km", report.earth_rotation_error_km},
                {"assumptions", report.assumptions}};
}

json spacetime_report_json(const Scenario& scenario, const PassOutputs& pass) {
    if (pass.pass.empty()) throw std::invalid_argument("spacetime_report_json: empty pass");
    // Conservative QRNG envelope across both stations: the slowest decision
    // rate and widest output delays give the largest setting age.
    QrngParams envelope;
    envelope.decision_rate_hz =
        std::min(scenario.qrng[0].decision_rate_hz, scenario.qrng[1].decision_rate_hz);
    envelope.output_delay_min_s =
        std::min(scenario.qrng[0].output_delay_min_s, scenario.qrng[1].output_delay_min_s);
    envelope.output_delay_max_s =
        std::max(scenario.qrng[0].output_delay_max_s, scenario.qrng[1].output_delay_max_s);

    const Vec3 p1 = station_position(scenario.stations[0]);
    const Vec3 p2 = station_position(scenario.stations[1]);
    const LoopholeReport report =
        loophole_report(pass.pass, p1, p2, envelope, scenario.measurement_lag_s);

    json j = loophole_report_to_json(report);
    j["scenario"] = scenario.name;
    j["measurement_lag_s"] = scenario.measurement_lag_s;
    j["delay_min_s"] = envelope.output_delay_min_s;
    j["delay_max_s"] = 1.0 / envelope.decision_rate_hz + envelope.output_delay_max_s;
    j["station_separation_km"] = norm(p1 - p2);
    j["n_pass_samples"] = pass.pass.size();
    return j;
}

}  // namespace entdist
