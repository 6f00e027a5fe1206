#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "entdist/timesync.hpp"

namespace entdist {

// Joint outcome counts at one analyzer-angle pair.
struct SettingCounts {
    double angle1_rad = 0.0;
    double angle2_rad = 0.0;
    std::int64_t n_pp = 0;
    std::int64_t n_pm = 0;
    std::int64_t n_mp = 0;
    std::int64_t n_mm = 0;

    std::int64_t total() const { return n_pp + n_pm + n_mp + n_mm; }
};

struct BellResult {
    std::array<double, 4> e{};        // per-setting correlations
    std::array<double, 4> sigma_e{};  // Poisson-propagated standard deviations
    double s = 0.0;                   // |E0 - E1 + E2 + E3|
    double sigma_s = 0.0;
    double violation_sigmas = 0.0;    // (S - 2) / sigma_S
};

// E = (n_pp + n_mm - n_pm - n_mp) / N with first-order propagation of
// independent Poisson count errors. Throws std::invalid_argument when N = 0.
std::pair<double, double> correlation(const SettingCounts& counts);

// CHSH statistic from the four settings in canonical order
// (0, pi/8), (0, 3pi/8), (pi/4, pi/8), (pi/4, 3pi/8):
// S = |E0 - E1 + E2 + E3|. Each setting needs a nonzero total.
BellResult chsh(const std::array<SettingCounts, 4>& settings);

// Count imbalance in one basis; identical formula to the correlation E.
double visibility(const SettingCounts& counts);

// Fidelity lower bound from H/V-basis populations P and the diagonal-basis
// correlator V_X: F_low = (P_HV + P_VH)/2 + V_X/2 - sqrt(P_HH * P_VV),
// with Poisson error propagation. The counts map to populations as
// n_pp -> P_HH, n_pm -> P_HV, n_mp -> P_VH, n_mm -> P_VV.
std::pair<double, double> fidelity_lower_bound(const SettingCounts& counts_hv,
                                               const SettingCounts& counts_diag);

struct RateReport {
    double total_rate_hz = 0.0;
    std::int64_t total_count = 0;
    double effective_time_s = 0.0;
    // keyed by (basis1, basis2) angle indices
    std::map<std::pair<int, int>, std::int64_t> per_setting;
};

RateReport coincidence_rate_report(const std::vector<CoincidenceRecord>& records,
                                   double effective_time_s);

// Aggregation of coincidence records into per-setting counts by exact
// angle-index equality. Indices outside the provided angle lists are tallied
// as excluded, never silently dropped.
struct SettingTally {
    std::map<std::pair<int, int>, SettingCounts> counts;
    std::int64_t excluded = 0;
};

SettingTally tally_settings(const std::vector<CoincidenceRecord>& records,
                            const std::vector<double>& angles1_rad,
                            const std::vector<double>& angles2_rad);

// The four canonical CHSH settings selected from a tally by angle value
// (tolerance 1e-9 rad). A setting with no records comes back zero-count —
// chsh() then reports which one is missing.
std::array<SettingCounts, 4> collect_chsh_counts(const std::vector<CoincidenceRecord>& records,
                                                 const std::vector<double>& angles1_rad,
                                                 const std::vector<double>& angles2_rad);

// The (H/V, diagonal) setting pair for the fidelity bound: station-1 angles
// {0, pi/4} with whatever station-2 angles realize the correlated bases.
std::pair<SettingCounts, SettingCounts> collect_fidelity_counts(
    const std::vector<CoincidenceRecord>& records, const std::vector<double>& angles1_rad,
    const std::vector<double>& angles2_rad);

// Bootstrap cross-check of sigma_S: resamples each setting's four counts from
// a multinomial of the same total, recomputes S, and returns the standard
// deviation over `reps` replicas.
double bootstrap_sigma_s(const std::array<SettingCounts, 4>& settings, int reps,
                         std::uint64_t seed);

// Exact Born-rule probabilities converted to counts at a given total, for
// feeding estimators with noise-free inputs (rounds to nearest integer).
SettingCounts counts_from_probabilities(double angle1_rad, double angle2_rad,
                                        const std::array<double, 4>& probs, std::int64_t total);

}  // namespace entdist
