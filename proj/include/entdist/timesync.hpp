#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entdist/eventsim.hpp"

namespace entdist {

// Linear relation between the two station clocks recovered from sync tags:
// t2 = t1 + offset_ps + drift_ps_per_s * (t1 / 1e12).
// Sync pulses are periodic, so the offset is only identifiable modulo the
// sync period; the fit is exact when the true relative offset (including any
// propagation asymmetry) is within half a period.
struct SyncFit {
    double offset_ps = 0.0;
    double drift_ps_per_s = 0.0;
    double residual_rms_ps = 0.0;
};

// One matched detection pair, both times in the station-1 ("common") clock.
struct CoincidenceRecord {
    std::int64_t t1_ps = 0;
    std::int64_t t2_ps = 0;
    std::uint8_t basis1 = 0;
    std::uint8_t basis2 = 0;
    int outcome1 = 0;  // +1 / -1
    int outcome2 = 0;
    // Ground-truth labels carried through from the tags, testing only.
    std::int32_t pair_id1 = -1;
    std::int32_t pair_id2 = -1;
};

// Tags on the sync channel (channel == 2), in order.
std::vector<TimeTag> filter_sync_tags(const std::vector<TimeTag>& tags);

// Least-squares fit of the clock relation over sync pulses associated by
// nearest-neighbor pulse matching. Throws std::invalid_argument with fewer
// than 10 sync tags per stream and std::runtime_error when pulse association
// is ambiguous (adjacent-pulse spacing under 4x the fitted jitter).
SyncFit fit_clock(const std::vector<TimeTag>& sync1, const std::vector<TimeTag>& sync2);

// Station-2 tag time expressed in the station-1 clock (rounded to 1 ps).
std::int64_t map_to_common_clock(std::int64_t t2_ps, const SyncFit& fit);

// The fit mapping station-1 times into the station-2 clock (for symmetry checks).
SyncFit invert(const SyncFit& fit);

// Greedy nearest-neighbor coincidence search: after mapping stream 2 onto the
// common clock, a two-cursor O(n+m) sweep pairs detector tags (channels 0/1;
// sync tags are skipped) with |t1 - t2| <= window_ps, each tag used at most
// once, ties broken toward the smaller |dt| and then the earlier tag pair.
// Inputs must be sorted by time or std::invalid_argument is thrown.
std::vector<CoincidenceRecord> match_coincidences(const std::vector<TimeTag>& tags1,
                                                  const std::vector<TimeTag>& tags2,
                                                  const SyncFit& fit, std::int64_t window_ps);

// Expected accidental coincidence rate singles1 * singles2 * window(s).
// Pass the full accepted width of the time-difference interval: a matcher
// accepting |dt| <= w spans a width of 2w, so use window_ps = 2w.
double accidental_rate(double singles1_hz, double singles2_hz, double window_ps);

// Coincidence CSV, header `t1_ps,t2_ps,basis1,basis2,outcome1,outcome2`.
// Writer is atomic; loader throws std::runtime_error naming the bad row.
void write_coincidences(const std::string& path, const std::vector<CoincidenceRecord>& records);
std::vector<CoincidenceRecord> load_coincidences(const std::string& path);

}  // namespace entdist
