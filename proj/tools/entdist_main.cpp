// entdist: scenario-driven simulator and analysis front end.
//
// Subcommands: pass, simulate, analyze, spacetime.
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "entdist/driver.hpp"
#include "entdist/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

using nlohmann::json;

void write_json(const std::string& path, const json& doc) {
    entdist::atomic_write(path, doc.dump(2) + "\n");
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// Scenario problems are configuration errors (exit 2); everything after a
// valid configuration is a data/runtime error (exit 3).
entdist::Scenario load_scenario_or_exit(const std::string& path) {
    try {
        return entdist::load_scenario(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::exit(kExitConfigError);
    }
}

int run_pass(const std::string& scenario_path, const std::string& out_dir) {
    const entdist::Scenario scenario = load_scenario_or_exit(scenario_path);
    try {
        const entdist::PassOutputs pass = entdist::compute_pass(scenario);
        std::filesystem::create_directories(out_dir);
        entdist::write_ephemeris(join(out_dir, "ephemeris.csv"), pass.pass);
        entdist::write_attenuation(join(out_dir, "attenuation.csv"), pass.attenuation);

        double min_total = pass.attenuation.front().total_db;
        double max_total = min_total;
        double min_t = pass.attenuation.front().t_s;
        double max_t = min_t;
        for (const entdist::AttenuationSample& a : pass.attenuation) {
            if (a.total_db < min_total) { min_total = a.total_db; min_t = a.t_s; }
            if (a.total_db > max_total) { max_total = a.total_db; max_t = a.t_s; }
        }
        const json summary{{"scenario", scenario.name},
                           {"n_samples", pass.pass.size()},
                           {"t_start_s", pass.pass.front().t_s},
                           {"t_end_s", pass.pass.back().t_s},
                           {"min_total_db", min_total},
                           {"min_total_at_t_s", min_t},
                           {"max_total_db", max_total},
                           {"max_total_at_t_s", max_t}};
        write_json(join(out_dir, "pass.json"), summary);
        std::cout << "pass: " << pass.pass.size() << " samples over ["
                  << pass.pass.front().t_s << ", " << pass.pass.back().t_s << "] s\n"
                  << "total attenuation: min " << min_total << " dB at t=" << min_t
                  << " s, max " << max_total << " dB at t=" << max_t << " s\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::string& mode_name, std::optional<std::uint64_t> seed) {
    const entdist::Scenario scenario = load_scenario_or_exit(scenario_path);
    if (mode_name != "bell" && mode_name != "fidelity") {
        std::cerr << "error: simulate --mode must be bell or fidelity\n";
        return kExitConfigError;
    }
    const entdist::SimMode mode =
        (mode_name == "bell") ? entdist::SimMode::bell : entdist::SimMode::fidelity;
    try {
        const entdist::PassOutputs pass = entdist::compute_pass(scenario);
        const entdist::SimulationOutputs sim =
            entdist::run_simulation(scenario, pass, mode, seed);
        std::filesystem::create_directories(out_dir);
        entdist::write_time_tags(join(out_dir, "station1.tags"), sim.detection.tags1);
        entdist::write_time_tags(join(out_dir, "station2.tags"), sim.detection.tags2);
        entdist::write_ground_truth(join(out_dir, "ground_truth.csv"), sim.detection.truth);
        write_json(join(out_dir, "manifest.json"), sim.manifest);
        std::cout << "simulate: " << sim.detection.tags1.size() << " tags at station 1, "
                  << sim.detection.tags2.size() << " tags at station 2, "
                  << sim.detection.truth.size() << " true pairs over " << sim.duration_s
                  << " s (handedness " << (sim.handedness_sign > 0 ? "+1" : "-1") << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

int run_analyze(const std::string& scenario_path, const std::string& tags1_path,
                const std::string& tags2_path, const std::string& out_dir,
                const std::string& mode_name, std::optional<std::int64_t> window_override) {
    entdist::AnalysisMode mode;
    if (mode_name == "bell") {
        mode = entdist::AnalysisMode::bell;
    } else if (mode_name == "fidelity") {
        mode = entdist::AnalysisMode::fidelity;
    } else if (mode_name == "rates") {
        mode = entdist::AnalysisMode::rates;
    } else {
        std::cerr << "error: --mode must be bell, fidelity or rates\n";
        return kExitConfigError;
    }

    std::int64_t window_ps = 2500;
    std::vector<double> angles1;
    std::vector<double> angles2;
    if (!scenario_path.empty()) {
        const entdist::Scenario scenario = load_scenario_or_exit(scenario_path);
        window_ps = scenario.window_ps;
        angles1 = (mode == entdist::AnalysisMode::fidelity) ? scenario.fidelity_angles1_rad
                                                            : scenario.bell_angles1_rad;
        angles2 = (mode == entdist::AnalysisMode::fidelity) ? scenario.fidelity_angles2_rad
                                                            : scenario.bell_angles2_rad;
    } else if (mode != entdist::AnalysisMode::rates) {
        std::cerr << "error: --scenario is required for bell and fidelity analysis "
                     "(it defines the analyzer angles)\n";
        return kExitConfigError;
    }
    if (window_override) window_ps = *window_override;
    if (window_ps <= 0) {
        std::cerr << "error: --window-ps must be > 0\n";
        return kExitConfigError;
    }

    try {
        const std::vector<entdist::TimeTag> tags1 = entdist::load_time_tags(tags1_path);
        const std::vector<entdist::TimeTag> tags2 = entdist::load_time_tags(tags2_path);
        const entdist::AnalysisOutputs analysis =
            entdist::analyze_tags(tags1, tags2, window_ps, mode, angles1, angles2);
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            entdist::write_coincidences(join(out_dir, "coincidences.csv"), analysis.records);
            write_json(join(out_dir, "analysis.json"), analysis.result);
        }
        std::cout << analysis.result.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

int run_spacetime(const std::string& scenario_path, const std::string& out_dir) {
    const entdist::Scenario scenario = load_scenario_or_exit(scenario_path);
    try {
        const entdist::PassOutputs pass = entdist::compute_pass(scenario);
        const json report = entdist::spacetime_report_json(scenario, pass);
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            write_json(join(out_dir, "spacetime.json"), report);
        }
        std::cout << report.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-downlink entanglement distribution simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string mode_name = "bell";
    std::string tags1_path;
    std::string tags2_path;
    std::uint64_t seed_value = 0;
    std::int64_t window_value = 0;

    CLI::App* cmd_pass = app.add_subcommand("pass", "Propagate the pass and the link budget");
    cmd_pass->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd_pass->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* cmd_simulate =
        app.add_subcommand("simulate", "Run the event simulation over the pass");
    cmd_simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd_simulate->add_option("--out", out_dir, "Output directory")->required();
    cmd_simulate->add_option("--mode", mode_name, "Angle set: bell or fidelity");
    CLI::Option* seed_opt =
        cmd_simulate->add_option("--seed", seed_value, "Override the scenario seed");

    CLI::App* cmd_analyze =
        app.add_subcommand("analyze", "Fit clocks, match coincidences, run estimators");
    cmd_analyze->add_option("--tags1", tags1_path, "Station-1 time-tag file")->required();
    cmd_analyze->add_option("--tags2", tags2_path, "Station-2 time-tag file")->required();
    cmd_analyze->add_option("--scenario", scenario_path,
                            "Scenario JSON file (angles and default window)");
    cmd_analyze->add_option("--out", out_dir, "Output directory (optional)");
    cmd_analyze->add_option("--mode", mode_name, "bell, fidelity or rates");
    CLI::Option* window_opt =
        cmd_analyze->add_option("--window-ps", window_value, "Coincidence half-window |dt| <= w");

    CLI::App* cmd_spacetime =
        app.add_subcommand("spacetime", "Space-time separation (loophole) report");
    cmd_spacetime->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd_spacetime->add_option("--out", out_dir, "Output directory (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    if (cmd_pass->parsed()) {
        return run_pass(scenario_path, out_dir);
    }
    if (cmd_simulate->parsed()) {
        std::optional<std::uint64_t> seed;
        if (seed_opt->count() > 0) seed = seed_value;
        return run_simulate(scenario_path, out_dir, mode_name, seed);
    }
    if (cmd_analyze->parsed()) {
        std::optional<std::int64_t> window;
        if (window_opt->count() > 0) window = window_value;
        return run_analyze(scenario_path, tags1_path, tags2_path, out_dir, mode_name, window);
    }
    if (cmd_spacetime->parsed()) {
        return run_spacetime(scenario_path, out_dir);
    }
    return kExitConfigError;
}
