#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdist/estimators.hpp"
#include "entdist/eventsim.hpp"
#include "entdist/linkbudget.hpp"
#include "entdist/scenario.hpp"
#include "entdist/spacetime.hpp"
#include "entdist/timesync.hpp"

namespace entdist {

enum class SimMode { bell, fidelity };
enum class AnalysisMode { bell, fidelity, rates };

struct PassOutputs {
    std::vector<PassSample> pass;
    std::vector<AttenuationSample> attenuation;
};

// Propagates the orbit (or loads the ephemeris) and evaluates the link budget.
PassOutputs compute_pass(const Scenario& scenario);

struct SimulationOutputs {
    DetectionResult detection;
    int handedness_sign = 0;
    double duration_s = 0.0;
    nlohmann::json manifest;  // every resolved parameter, for replayability
};

// Runs the full event simulation over the pass with the mode's angle set.
SimulationOutputs run_simulation(const Scenario& scenario, const PassOutputs& pass,
                                 SimMode mode, std::optional<std::uint64_t> seed_override = {});

struct AnalysisOutputs {
    SyncFit fit;
    std::vector<CoincidenceRecord> records;
    nlohmann::json result;
};

// Sync fit, coincidence matching, and the estimators requested by `mode`.
// Angle lists give meaning to the basis indices in the tags. Throws on
// estimator precondition failures (e.g. bell mode with no coincidences).
AnalysisOutputs analyze_tags(const std::vector<TimeTag>& tags1, const std::vector<TimeTag>& tags2,
                             std::int64_t window_ps, AnalysisMode mode,
                             const std::vector<double>& angles1_rad,
                             const std::vector<double>& angles2_rad, int bootstrap_reps = 0,
                             std::uint64_t bootstrap_seed = 1);

// Loophole report for the scenario's pass as a JSON document.
nlohmann::json spacetime_report_json(const Scenario& scenario, const PassOutputs& pass);

nlohmann::json loophole_report_to_json(const LoopholeReport& report);

}  // namespace entdist
