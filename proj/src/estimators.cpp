#include "entdist/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entdist/constants.hpp"
#include "entdist/rng.hpp"

namespace entdist {

namespace {

void check_counts(const SettingCounts& c) {
    if (c.n_pp < 0 || c.n_pm < 0 || c.n_mp < 0 || c.n_mm < 0) {
        throw std::invalid_argument("estimators: counts must be >= 0");
    }
}

bool angles_match(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

std::pair<double, double> correlation(const SettingCounts& counts) {
    check_counts(counts);
    const double n = static_cast<double>(counts.total());
    if (!(n > 0.0)) {
        throw std::invalid_argument("correlation: total count is zero");
    }
    const double agree = static_cast<double>(counts.n_pp + counts.n_mm);
    const double disagree = static_cast<double>(counts.n_pm + counts.n_mp);
    const double e = (agree - disagree) / n;
    // First-order propagation of independent Poisson errors:
    // dE/dn = (1 - E)/N for agreeing counts, -(1 + E)/N for disagreeing ones.
    const double var = (1.0 - e) * (1.0 - e) * agree / (n * n) +
                       (1.0 + e) * (1.0 + e) * disagree / (n * n);
    return {e, std::sqrt(var)};
}

BellResult chsh(const std::array<SettingCounts, 4>& settings) {
    BellResult result;
    for (int k = 0; k < 4; ++k) {
        if (settings[k].total() == 0) {
            throw std::invalid_argument("chsh: setting " + std::to_string(k) +
                                        " has no coincidences");
        }
        const auto [e, sigma] = correlation(settings[k]);
        result.e[k] = e;
        result.sigma_e[k] = sigma;
    }
    const double raw = result.e[0] - result.e[1] + result.e[2] + result.e[3];
    result.s = std::abs(raw);
    double var = 0.0;
    for (const double sigma : result.sigma_e) var += sigma * sigma;
    result.sigma_s = std::sqrt(var);
    result.violation_sigmas = (result.s - 2.0) / result.sigma_s;
    return result;
}

double visibility(const SettingCounts& counts) { return correlation(counts).first; }

std::pair<double, double> fidelity_lower_bound(const SettingCounts& counts_hv,
                                               const SettingCounts& counts_diag) {
    check_counts(counts_hv);
    check_counts(counts_diag);
    const double n1 = static_cast<double>(counts_hv.total());
    const double n2 = static_cast<double>(counts_diag.total());
    if (!(n1 > 0.0) || !(n2 > 0.0)) {
        throw std::invalid_argument("fidelity_lower_bound: both settings need counts");
    }
    const double n_hh = static_cast<double>(counts_hv.n_pp);
    const double n_hv = static_cast<double>(counts_hv.n_pm);
    const double n_vh = static_cast<double>(counts_hv.n_mp);
    const double n_vv = static_cast<double>(counts_hv.n_mm);
    const double cross = static_cast<double>(counts_hv.n_pm + counts_hv.n_mp);

    const double populations = cross / (2.0 * n1);
    const double crosstalk = std::sqrt(n_hh * n_vv) / n1;
    const double v_x = visibility(counts_diag);
    const double f_low = populations + v_x / 2.0 - crosstalk;

    // Partials of the population and crosstalk terms, including the total-N
    // dependence. The sqrt term's partials are taken as zero when either
    // population vanishes (one-sided degenerate limit).
    const double d_pop_cross = (n1 - cross) / (2.0 * n1 * n1);  // for n_HV, n_VH
    const double d_pop_diag = -cross / (2.0 * n1 * n1);         // for n_HH, n_VV
    double d_ct_hh = -crosstalk / n1;
    double d_ct_vv = -crosstalk / n1;
    if (n_hh > 0.0 && n_vv > 0.0) {
        d_ct_hh += 0.5 * std::sqrt(n_vv / n_hh) / n1;
        d_ct_vv += 0.5 * std::sqrt(n_hh / n_vv) / n1;
    }
    const double d_ct_cross = -crosstalk / n1;  // for n_HV, n_VH

    double var = 0.0;
    var += (d_pop_diag - d_ct_hh) * (d_pop_diag - d_ct_hh) * n_hh;
    var += (d_pop_cross - d_ct_cross) * (d_pop_cross - d_ct_cross) * n_hv;
    var += (d_pop_cross - d_ct_cross) * (d_pop_cross - d_ct_cross) * n_vh;
    var += (d_pop_diag - d_ct_vv) * (d_pop_diag - d_ct_vv) * n_vv;

    // Diagonal-basis contribution through V_X / 2.
    const double agree = static_cast<double>(counts_diag.n_pp + counts_diag.n_mm);
    const double disagree = static_cast<double>(counts_diag.n_pm + counts_diag.n_mp);
    const double dv_agree = (1.0 - v_x) / n2 / 2.0;
    const double dv_disagree = -(1.0 + v_x) / n2 / 2.0;
    var += dv_agree * dv_agree * agree + dv_disagree * dv_disagree * disagree;

    return {f_low, std::sqrt(var)};
}

RateReport coincidence_rate_report(const std::vector<CoincidenceRecord>& records,
                                   double effective_time_s) {
    if (!(effective_time_s > 0.0)) {
        throw std::invalid_argument("coincidence_rate_report: effective time must be > 0");
    }
    RateReport report;
    report.effective_time_s = effective_time_s;
    report.total_count = static_cast<std::int64_t>(records.size());
    report.total_rate_hz = static_cast<double>(records.size()) / effective_time_s;
    for (const CoincidenceRecord& r : records) {
        ++report.per_setting[{r.basis1, r.basis2}];
    }
    return report;
}

SettingTally tally_settings(const std::vector<CoincidenceRecord>& records,
                            const std::vector<double>& angles1_rad,
                            const std::vector<double>& angles2_rad) {
    SettingTally tally;
    for (const CoincidenceRecord& r : records) {
        if (r.basis1 >= angles1_rad.size() || r.basis2 >= angles2_rad.size()) {
            ++tally.excluded;
            continue;
        }
        SettingCounts& c = tally.counts[{r.basis1, r.basis2}];
        c.angle1_rad = angles1_rad[r.basis1];
        c.angle2_rad = angles2_rad[r.basis2];
        if (r.outcome1 > 0) {
            (r.outcome2 > 0 ? c.n_pp : c.n_pm) += 1;
        } else {
            (r.outcome2 > 0 ? c.n_mp : c.n_mm) += 1;
        }
    }
    return tally;
}

std::array<SettingCounts, 4> collect_chsh_counts(const std::vector<CoincidenceRecord>& records,
                                                 const std::vector<double>& angles1_rad,
                                                 const std::vector<double>& angles2_rad) {
    const SettingTally tally = tally_settings(records, angles1_rad, angles2_rad);
    const std::array<std::pair<double, double>, 4> canonical{{
        {0.0, kPi / 8.0},
        {0.0, 3.0 * kPi / 8.0},
        {kPi / 4.0, kPi / 8.0},
        {kPi / 4.0, 3.0 * kPi / 8.0},
    }};
    std::array<SettingCounts, 4> out{};
    for (int k = 0; k < 4; ++k) {
        bool found = false;
        for (const auto& [key, counts] : tally.counts) {
            if (angles_match(counts.angle1_rad, canonical[k].first) &&
                angles_match(counts.angle2_rad, canonical[k].second)) {
                out[k] = counts;
                found = true;
                break;
            }
        }
        if (!found) {
            out[k].angle1_rad = canonical[k].first;
            out[k].angle2_rad = canonical[k].second;
        }
    }
    return out;
}

std::pair<SettingCounts, SettingCounts> collect_fidelity_counts(
    const std::vector<CoincidenceRecord>& records, const std::vector<double>& angles1_rad,
    const std::vector<double>& angles2_rad) {
    const SettingTally tally = tally_settings(records, angles1_rad, angles2_rad);
    SettingCounts hv, diag;
    bool have_hv = false, have_diag = false;
    for (const auto& [key, counts] : tally.counts) {
        if (angles_match(counts.angle1_rad, 0.0) && angles_match(counts.angle2_rad, 0.0)) {
            hv = counts;
            have_hv = true;
        } else if (angles_match(counts.angle1_rad, kPi / 4.0) &&
                   !angles_match(counts.angle2_rad, 0.0)) {
            diag = counts;
            have_diag = true;
        }
    }
    if (!have_hv || !have_diag) {
        // Preserve the angles so callers get a named precondition error from
        // fidelity_lower_bound rather than a silent zero.
        if (!have_hv) hv = SettingCounts{0.0, 0.0, 0, 0, 0, 0};
        if (!have_diag) diag = SettingCounts{kPi / 4.0, kPi / 4.0, 0, 0, 0, 0};
    }
    return {hv, diag};
}

double bootstrap_sigma_s(const std::array<SettingCounts, 4>& settings, int reps,
                         std::uint64_t seed) {
    if (reps < 2) {
        throw std::invalid_argument("bootstrap_sigma_s: need at least 2 replicas");
    }
    std::vector<double> s_values;
    s_values.reserve(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        CounterRng rng(seed, static_cast<std::uint64_t>(rep), 42);
        std::array<SettingCounts, 4> resampled{};
        for (int k = 0; k < 4; ++k) {
            const SettingCounts& c = settings[k];
            const double n = static_cast<double>(c.total());
            const std::array<double, 4> p{static_cast<double>(c.n_pp) / n,
                                          static_cast<double>(c.n_pm) / n,
                                          static_cast<double>(c.n_mp) / n,
                                          static_cast<double>(c.n_mm) / n};
            SettingCounts& r = resampled[k];
            r.angle1_rad = c.angle1_rad;
            r.angle2_rad = c.angle2_rad;
            for (std::int64_t draw = 0; draw < c.total(); ++draw) {
                const double u = rng.uniform01();
                if (u < p[0]) {
                    ++r.n_pp;
                } else if (u < p[0] + p[1]) {
                    ++r.n_pm;
                } else if (u < p[0] + p[1] + p[2]) {
                    ++r.n_mp;
                } else {
                    ++r.n_mm;
                }
            }
        }
        s_values.push_back(chsh(resampled).s);
    }
    double mean = 0.0;
    for (double s : s_values) mean += s;
    mean /= static_cast<double>(s_values.size());
    double var = 0.0;
    for (double s : s_values) var += (s - mean) * (s - mean);
    var /= static_cast<double>(s_values.size() - 1);
    return std::sqrt(var);
}

SettingCounts counts_from_probabilities(double angle1_rad, double angle2_rad,
                                        const std::array<double, 4>& probs, std::int64_t total) {
    if (total <= 0) {
        throw std::invalid_argument("counts_from_probabilities: total must be > 0");
    }
    SettingCounts c;
    c.angle1_rad = angle1_rad;
    c.angle2_rad = angle2_rad;
    c.n_pp = std::llround(probs[0] * static_cast<double>(total));
    c.n_pm = std::llround(probs[1] * static_cast<double>(total));
    c.n_mp = std::llround(probs[2] * static_cast<double>(total));
    c.n_mm = std::llround(probs[3] * static_cast<double>(total));
    return c;
}

}  // namespace entdist
