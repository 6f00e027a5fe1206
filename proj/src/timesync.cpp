#include "entdist/timesync.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "entdist/constants.hpp"
#include "entdist/io.hpp"

namespace entdist {

namespace {

void require_sorted(const std::vector<TimeTag>& tags, const char* which) {
    if (!std::is_sorted(tags.begin(), tags.end(),
                        [](const TimeTag& a, const TimeTag& b) { return a.time_ps < b.time_ps; })) {
        throw std::invalid_argument(std::string(which) + ": tags are not sorted by time");
    }
}

}  // namespace

std::vector<TimeTag> filter_sync_tags(const std::vector<TimeTag>& tags) {
    std::vector<TimeTag> out;
    for (const TimeTag& t : tags) {
        if (t.channel == 2) out.push_back(t);
    }
    return out;
}

SyncFit fit_clock(const std::vector<TimeTag>& sync1, const std::vector<TimeTag>& sync2) {
    if (sync1.size() < 10 || sync2.size() < 10) {
        throw std::invalid_argument("fit_clock: need at least 10 sync tags per stream");
    }
    require_sorted(sync1, "fit_clock sync1");
    require_sorted(sync2, "fit_clock sync2");

    // Associate every stream-2 pulse with its nearest stream-1 pulse (two
    // cursors). The sync train is periodic, so this resolves pulse numbers
    // only when the true relative offset stays within half a period; that
    // constraint is inherent to periodic sync and documented in the header.
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (t1, t2)
    pairs.reserve(sync2.size());
    std::size_t i = 0;
    std::size_t last_i = static_cast<std::size_t>(-1);
    for (const TimeTag& tag2 : sync2) {
        while (i + 1 < sync1.size() &&
               std::llabs(sync1[i + 1].time_ps - tag2.time_ps) <=
                   std::llabs(sync1[i].time_ps - tag2.time_ps)) {
            ++i;
        }
        if (i == last_i && !pairs.empty()) {
            // Two stream-2 pulses competing for one stream-1 pulse: keep the closer.
            if (std::llabs(tag2.time_ps - sync1[i].time_ps) <
                std::llabs(pairs.back().second - pairs.back().first)) {
                pairs.back() = {sync1[i].time_ps, tag2.time_ps};
            }
            continue;
        }
        last_i = i;
        pairs.emplace_back(sync1[i].time_ps, tag2.time_ps);
    }
    if (pairs.size() < 10) {
        throw std::invalid_argument("fit_clock: fewer than 10 associated pulse pairs");
    }

    // Least squares of y = t2 - t1 against x = t1 (both relative to means
    // for conditioning): t2 = t1 + offset + drift * t1 / 1e12.
    const std::size_t n = pairs.size();
    double x_mean = 0.0, y_mean = 0.0;
    for (const auto& [t1, t2] : pairs) {
        x_mean += static_cast<double>(t1);
        y_mean += static_cast<double>(t2 - t1);
    }
    x_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [t1, t2] : pairs) {
        const double dx = static_cast<double>(t1) - x_mean;
        const double dy = static_cast<double>(t2 - t1) - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;  // ps drift per ps
    SyncFit fit;
    fit.drift_ps_per_s = slope * kPsPerSecond;
    fit.offset_ps = y_mean - slope * x_mean;

    double ss = 0.0;
    for (const auto& [t1, t2] : pairs) {
        const double r = static_cast<double>(t2 - t1) -
                         (fit.offset_ps + slope * static_cast<double>(t1));
        ss += r * r;
    }
    fit.residual_rms_ps = std::sqrt(ss / static_cast<double>(n));

    // Association ambiguity: pulses must be spaced well clear of the jitter.
    std::vector<double> gaps;
    gaps.reserve(sync1.size() - 1);
    for (std::size_t k = 1; k < sync1.size(); ++k) {
        gaps.push_back(static_cast<double>(sync1[k].time_ps - sync1[k - 1].time_ps));
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double median_gap = gaps[gaps.size() / 2];
    if (median_gap < 4.0 * fit.residual_rms_ps) {
        throw std::runtime_error(
            "fit_clock: pulse association is ambiguous (adjacent-pulse spacing below 4x jitter)");
    }
    return fit;
}

std::int64_t map_to_common_clock(std::int64_t t2_ps, const SyncFit& fit) {
    const double slope = fit.drift_ps_per_s / kPsPerSecond;
    return std::llround((static_cast<double>(t2_ps) - fit.offset_ps) / (1.0 + slope));
}

SyncFit invert(const SyncFit& fit) {
    const double slope = fit.drift_ps_per_s / kPsPerSecond;
    SyncFit inv;
    inv.drift_ps_per_s = -slope / (1.0 + slope) * kPsPerSecond;
    inv.offset_ps = -fit.offset_ps / (1.0 + slope);
    inv.residual_rms_ps = fit.residual_rms_ps;
    return inv;
}

std::vector<CoincidenceRecord> match_coincidences(const std::vector<TimeTag>& tags1,
                                                  const std::vector<TimeTag>& tags2,
                                                  const SyncFit& fit, std::int64_t window_ps) {
    if (!(window_ps > 0)) {
        throw std::invalid_argument("match_coincidences: window must be > 0");
    }
    require_sorted(tags1, "match_coincidences tags1");
    require_sorted(tags2, "match_coincidences tags2");

    // Detector tags only, stream 2 mapped onto the common (station-1) clock.
    struct Entry {
        std::int64_t time_ps;
        std::uint32_t index;  // into the filtered arrays
        const TimeTag* tag;
    };
    std::vector<Entry> a, b;
    a.reserve(tags1.size());
    b.reserve(tags2.size());
    for (const TimeTag& t : tags1) {
        if (t.channel != 2) a.push_back(Entry{t.time_ps, static_cast<std::uint32_t>(a.size()), &t});
    }
    for (const TimeTag& t : tags2) {
        if (t.channel != 2) {
            b.push_back(Entry{map_to_common_clock(t.time_ps, fit),
                              static_cast<std::uint32_t>(b.size()), &t});
        }
    }

    // Candidate pairs within the window via a two-cursor sweep, then greedy
    // acceptance in order of |dt| with ties toward the earlier stream-1 tag
    // and then the earlier stream-2 tag. The brute-force oracle in the test
    // suite implements the same rule by exhaustive enumeration.
    struct Candidate {
        std::int64_t abs_dt;
        std::uint32_t ia;
        std::uint32_t ib;
    };
    std::vector<Candidate> candidates;
    std::size_t lo = 0;
    for (std::size_t ia = 0; ia < a.size(); ++ia) {
        while (lo < b.size() && b[lo].time_ps < a[ia].time_ps - window_ps) ++lo;
        for (std::size_t ib = lo; ib < b.size() && b[ib].time_ps <= a[ia].time_ps + window_ps;
             ++ib) {
            candidates.push_back(Candidate{std::llabs(a[ia].time_ps - b[ib].time_ps),
                                           static_cast<std::uint32_t>(ia),
                                           static_cast<std::uint32_t>(ib)});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(x.abs_dt, x.ia, x.ib) < std::tie(y.abs_dt, y.ia, y.ib);
    });

    std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
    std::vector<CoincidenceRecord> records;
    for (const Candidate& c : candidates) {
        if (used_a[c.ia] || used_b[c.ib]) continue;
        used_a[c.ia] = 1;
        used_b[c.ib] = 1;
        const TimeTag& t1 = *a[c.ia].tag;
        const TimeTag& t2 = *b[c.ib].tag;
        CoincidenceRecord rec;
        rec.t1_ps = a[c.ia].time_ps;
        rec.t2_ps = b[c.ib].time_ps;
        rec.basis1 = t1.basis_index;
        rec.basis2 = t2.basis_index;
        rec.outcome1 = t1.channel == 0 ? +1 : -1;
        rec.outcome2 = t2.channel == 0 ? +1 : -1;
        rec.pair_id1 = t1.pair_id;
        rec.pair_id2 = t2.pair_id;
        records.push_back(rec);
    }
    std::sort(records.begin(), records.end(), [](const CoincidenceRecord& x,
                                                 const CoincidenceRecord& y) {
        return std::tie(x.t1_ps, x.t2_ps) < std::tie(y.t1_ps, y.t2_ps);
    });
    return records;
}

double accidental_rate(double singles1_hz, double singles2_hz, double window_ps) {
    if (!(singles1_hz >= 0.0) || !(singles2_hz >= 0.0) || !(window_ps >= 0.0)) {
        throw std::invalid_argument("accidental_rate: inputs must be >= 0");
    }
    return singles1_hz * singles2_hz * (window_ps / kPsPerSecond);
}

void write_coincidences(const std::string& path, const std::vector<CoincidenceRecord>& records) {
    std::ostringstream out;
    out << "t1_ps,t2_ps,basis1,basis2,outcome1,outcome2\n";
    for (const CoincidenceRecord& r : records) {
        out << r.t1_ps << ',' << r.t2_ps << ',' << static_cast<int>(r.basis1) << ','
            << static_cast<int>(r.basis2) << ',' << r.outcome1 << ',' << r.outcome2 << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<CoincidenceRecord> load_coincidences(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t1_ps,t2_ps,basis1,basis2,outcome1,outcome2") {
        throw std::runtime_error(path + ": bad coincidence header");
    }
    std::vector<CoincidenceRecord> records;
    long long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::string ctx = path + " row " + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw std::runtime_error(ctx + ": expected 6 columns");
        }
        CoincidenceRecord r;
        r.t1_ps = parse_int(fields[0], ctx);
        r.t2_ps = parse_int(fields[1], ctx);
        const long long b1 = parse_int(fields[2], ctx);
        const long long b2 = parse_int(fields[3], ctx);
        if (b1 < 0 || b1 > 255 || b2 < 0 || b2 > 255) {
            throw std::runtime_error(ctx + ": basis indices must be 0..255");
        }
        r.basis1 = static_cast<std::uint8_t>(b1);
        r.basis2 = static_cast<std::uint8_t>(b2);
        r.outcome1 = static_cast<int>(parse_int(fields[4], ctx));
        r.outcome2 = static_cast<int>(parse_int(fields[5], ctx));
        if (std::abs(r.outcome1) != 1 || std::abs(r.outcome2) != 1) {
            throw std::runtime_error(ctx + ": outcomes must be +1 or -1");
        }
        records.push_back(r);
    }
    return records;
}

}  // namespace entdist
