#include "entdist/eventsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entdist/constants.hpp"
#include "entdist/io.hpp"

namespace entdist {

namespace {

// Slice-scoped substream ids. QRNG decision streams are keyed by tick rather
// than slice and use ids >= 1000, so the two families never collide.
enum SliceStream : std::uint64_t {
    kStreamEmission = 0,
    kStreamTransport = 1,
    kStreamNoiseBase = 2,  // +station*2 + detector
    kStreamSyncBase = 6,   // +station
};
constexpr std::uint64_t kStreamQrngBase = 1000;

struct LossCurve {
    const std::vector<double>* t_s;
    const std::vector<double>* v_db;

    double at(double t) const {
        const auto& ts = *t_s;
        const auto& vs = *v_db;
        if (vs.size() == 1 || t <= ts.front()) return vs.front();
        if (t >= ts.back()) return vs.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
        const std::size_t lo = hi - 1;
        const double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
        return vs[lo] + f * (vs[hi] - vs[lo]);
    }
};

// Born-rule outcome tables for every selectable setting pair, precomputed so
// the per-emission hot path never touches Eigen.
struct OutcomeTables {
    int n1 = 0, n2 = 0;
    std::vector<std::array<double, 4>> joint_cdf;  // [i*n2+j] over {pp,pm,mp,mm}
    std::vector<double> marginal1_plus;            // per station-1 angle
    std::vector<double> marginal2_plus;            // per station-2 angle
};

OutcomeTables build_tables(const TwoQubitState& state, const std::vector<double>& angles1,
                           const std::vector<double>& angles2, int handedness_sign) {
    OutcomeTables t;
    t.n1 = static_cast<int>(angles1.size());
    t.n2 = static_cast<int>(angles2.size());
    t.joint_cdf.resize(static_cast<std::size_t>(t.n1) * t.n2);
    t.marginal1_plus.assign(t.n1, 0.0);
    t.marginal2_plus.assign(t.n2, 0.0);
    for (int i = 0; i < t.n1; ++i) {
        for (int j = 0; j < t.n2; ++j) {
            const auto p = measurement_probabilities(state, AnalyzerSetting{angles1[i], +1},
                                                     AnalyzerSetting{angles2[j], handedness_sign});
            std::array<double, 4>& cdf = t.joint_cdf[static_cast<std::size_t>(i) * t.n2 + j];
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                acc += p[k];
                cdf[k] = acc;
            }
            cdf[3] = 1.0;  // guard against rounding in the last bin
            if (j == 0) t.marginal1_plus[i] = p[0] + p[1];
            if (i == 0) t.marginal2_plus[j] = p[0] + p[2];
        }
    }
    return t;
}

struct SliceOutput {
    std::vector<TimeTag> tags1;
    std::vector<TimeTag> tags2;
    std::vector<GroundTruthPair> truth;
};

std::int64_t to_local_ps(double true_ps, const ClockModel& clock) {
    return std::llround(true_ps + clock.offset_ps + clock.drift_ps_per_s * (true_ps / kPsPerSecond));
}

struct SliceContext {
    const SimConfig* cfg;
    const OutcomeTables* tables;
    const QrngSchedule* sched1;
    const QrngSchedule* sched2;
    LossCurve loss1;
    LossCurve loss2;
    std::array<double, 2> mean_port_eff;
};

// Photon-pair transport for one slice. `emis_begin/end` supply pre-generated
// emission times (ps); when null, emissions are drawn as a Poisson process
// from the slice's own substream. Both paths are pure functions of
// (seed, slice_index), which is what makes thread count irrelevant.
void simulate_slice(const SliceContext& ctx, std::uint64_t slice_index, double t0_s, double t1_s,
                    const double* emis_begin, const double* emis_end, SliceOutput& out) {
    const SimConfig& cfg = *ctx.cfg;
    const OutcomeTables& tables = *ctx.tables;
    const StationConfig& st1 = cfg.stations[0];
    const StationConfig& st2 = cfg.stations[1];

    CounterRng transport(cfg.seed, slice_index, kStreamTransport);
    CounterRng emitter(cfg.seed, slice_index, kStreamEmission);

    double gen_t_ps = t0_s * kPsPerSecond;
    const double t1_ps = t1_s * kPsPerSecond;
    const double* next_given = emis_begin;
    const bool generate = emis_begin == nullptr;

    std::int32_t local_pair = 0;
    while (true) {
        double t_ps;
        if (generate) {
            gen_t_ps += emitter.exponential(cfg.pair_rate_hz) * kPsPerSecond;
            if (gen_t_ps >= t1_ps) break;
            t_ps = gen_t_ps;
        } else {
            if (next_given == emis_end) break;
            t_ps = *next_given++;
        }

        const double t_emit_s = t_ps / kPsPerSecond;
        const double p1 =
            std::pow(10.0, -ctx.loss1.at(t_emit_s) / 10.0) * ctx.mean_port_eff[0];
        const double p2 =
            std::pow(10.0, -ctx.loss2.at(t_emit_s) / 10.0) * ctx.mean_port_eff[1];
        const bool s1 = transport.uniform01() < p1;
        const bool s2 = transport.uniform01() < p2;
        if (!s1 && !s2) continue;

        const double arr1_ps = t_ps + st1.propagation_delay_ps;
        const double arr2_ps = t_ps + st2.propagation_delay_ps;
        int b1 = 0, b2 = 0, o1 = 0, o2 = 0;
        if (s1) b1 = ctx.sched1->basis_index_at(arr1_ps / kPsPerSecond);
        if (s2) b2 = ctx.sched2->basis_index_at(arr2_ps / kPsPerSecond);

        if (s1 && s2) {
            const auto& cdf = tables.joint_cdf[static_cast<std::size_t>(b1) * tables.n2 + b2];
            const double u = transport.uniform01();
            const int k = u < cdf[1] ? (u < cdf[0] ? 0 : 1) : (u < cdf[2] ? 2 : 3);
            o1 = k <= 1 ? +1 : -1;
            o2 = (k % 2 == 0) ? +1 : -1;
        } else if (s1) {
            o1 = transport.uniform01() < tables.marginal1_plus[b1] ? +1 : -1;
        } else {
            o2 = transport.uniform01() < tables.marginal2_plus[b2] ? +1 : -1;
        }

        std::int64_t t1_local = 0, t2_local = 0;
        if (s1) {
            const DetectorParams& det = st1.detectors[o1 > 0 ? 0 : 1];
            const double jit = det.time_jitter_sigma_ps > 0.0
                                   ? transport.normal(0.0, det.time_jitter_sigma_ps)
                                   : 0.0;
            t1_local = to_local_ps(arr1_ps + jit, st1.clock);
        }
        if (s2) {
            const DetectorParams& det = st2.detectors[o2 > 0 ? 0 : 1];
            const double jit = det.time_jitter_sigma_ps > 0.0
                                   ? transport.normal(0.0, det.time_jitter_sigma_ps)
                                   : 0.0;
            t2_local = to_local_ps(arr2_ps + jit, st2.clock);
        }

        const bool both = s1 && s2;
        const std::int32_t id = both ? local_pair++ : -1;
        if (s1) {
            out.tags1.push_back(TimeTag{t1_local, id, static_cast<std::uint8_t>(o1 > 0 ? 0 : 1),
                                        static_cast<std::uint8_t>(b1)});
        }
        if (s2) {
            out.tags2.push_back(TimeTag{t2_local, id, static_cast<std::uint8_t>(o2 > 0 ? 0 : 1),
                                        static_cast<std::uint8_t>(b2)});
        }
        if (both) {
            out.truth.push_back(GroundTruthPair{id, t1_local, t2_local, o1, o2, b1, b2});
        }
    }

    // Dark and background counts: independent Poisson processes per detector.
    for (int station = 0; station < 2; ++station) {
        const StationConfig& st = cfg.stations[station];
        const QrngSchedule* sched = station == 0 ? ctx.sched1 : ctx.sched2;
        std::vector<TimeTag>& tags = station == 0 ? out.tags1 : out.tags2;
        for (int d = 0; d < 2; ++d) {
            const double rate = st.detectors[d].dark_rate_hz + st.detectors[d].background_rate_hz;
            if (rate <= 0.0) continue;
            CounterRng rng(cfg.seed, slice_index, kStreamNoiseBase + 2 * station + d);
            double t = t0_s;
            while (true) {
                t += rng.exponential(rate);
                if (t >= t1_s) break;
                const double true_ps = t * kPsPerSecond;
                tags.push_back(TimeTag{to_local_ps(true_ps, st.clock), -1,
                                       static_cast<std::uint8_t>(d),
                                       static_cast<std::uint8_t>(sched->basis_index_at(t))});
            }
        }
    }

    // Sync pulses: a shared train emitted at the satellite, received by both
    // stations after their propagation delays with independent jitter.
    for (int station = 0; station < 2; ++station) {
        const StationConfig& st = cfg.stations[station];
        const double rate = st.clock.sync_pulse_rate_hz;
        std::vector<TimeTag>& tags = station == 0 ? out.tags1 : out.tags2;
        CounterRng rng(cfg.seed, slice_index, kStreamSyncBase + station);
        const std::int64_t k_lo = static_cast<std::int64_t>(std::ceil(t0_s * rate));
        for (std::int64_t k = k_lo;; ++k) {
            const double emit_s = static_cast<double>(k) / rate;
            if (emit_s >= t1_s) break;
            double true_ps = emit_s * kPsPerSecond + st.propagation_delay_ps;
            if (st.clock.sync_jitter_sigma_ps > 0.0) {
                true_ps += rng.normal(0.0, st.clock.sync_jitter_sigma_ps);
            }
            tags.push_back(TimeTag{to_local_ps(true_ps, st.clock), -1, 2, 0});
        }
    }
}

bool tag_less(const TimeTag& a, const TimeTag& b) {
    if (a.time_ps != b.time_ps) return a.time_ps < b.time_ps;
    if (a.channel != b.channel) return a.channel < b.channel;
    if (a.basis_index != b.basis_index) return a.basis_index < b.basis_index;
    return a.pair_id < b.pair_id;
}

DetectionResult run_slices(const SimConfig& cfg, const std::vector<double>* emissions) {
    validate(cfg.stations[0].detectors[0]);
    validate(cfg.stations[0].detectors[1]);
    validate(cfg.stations[1].detectors[0]);
    validate(cfg.stations[1].detectors[1]);
    validate(cfg.stations[0].clock);
    validate(cfg.stations[1].clock);
    if (cfg.stations[0].angles_rad.empty() || cfg.stations[1].angles_rad.empty()) {
        throw std::invalid_argument("simulation: each station needs at least one analyzer angle");
    }
    if (!(cfg.slice_s > 0.0)) {
        throw std::invalid_argument("simulation: slice_s must be > 0");
    }
    if (cfg.loss_t_s.size() != cfg.loss1_db.size() || cfg.loss_t_s.size() != cfg.loss2_db.size() ||
        cfg.loss_t_s.empty()) {
        throw std::invalid_argument("simulation: loss curves must share one nonempty time axis");
    }
    if (emissions == nullptr && !(cfg.pair_rate_hz > 0.0)) {
        throw std::invalid_argument("simulation: pair_rate_hz must be > 0");
    }

    const QrngSchedule sched1(cfg.stations[0].qrng,
                              static_cast<int>(cfg.stations[0].angles_rad.size()), cfg.seed,
                              kStreamQrngBase + 0);
    const QrngSchedule sched2(cfg.stations[1].qrng,
                              static_cast<int>(cfg.stations[1].angles_rad.size()), cfg.seed,
                              kStreamQrngBase + 1);
    const OutcomeTables tables = build_tables(cfg.state, cfg.stations[0].angles_rad,
                                              cfg.stations[1].angles_rad, cfg.handedness_sign);

    SliceContext ctx;
    ctx.cfg = &cfg;
    ctx.tables = &tables;
    ctx.sched1 = &sched1;
    ctx.sched2 = &sched2;
    ctx.loss1 = LossCurve{&cfg.loss_t_s, &cfg.loss1_db};
    ctx.loss2 = LossCurve{&cfg.loss_t_s, &cfg.loss2_db};
    for (int s = 0; s < 2; ++s) {
        ctx.mean_port_eff[s] = 0.5 * (cfg.stations[s].detectors[0].efficiency +
                                      cfg.stations[s].detectors[1].efficiency);
    }

    const double span_s = cfg.t_end_s - cfg.t_start_s;
    const std::int64_t n_slices =
        span_s > 0.0 ? static_cast<std::int64_t>(std::ceil(span_s / cfg.slice_s)) : 0;
    std::vector<SliceOutput> slices(static_cast<std::size_t>(n_slices));

    auto slice_bounds = [&](std::int64_t i, double& t0, double& t1) {
        t0 = cfg.t_start_s + static_cast<double>(i) * cfg.slice_s;
        t1 = std::min(cfg.t_end_s, t0 + cfg.slice_s);
    };
    auto run_one = [&](std::int64_t i) {
        double t0, t1;
        slice_bounds(i, t0, t1);
        const double* begin = nullptr;
        const double* end = nullptr;
        if (emissions != nullptr) {
            const auto lo = std::lower_bound(emissions->begin(), emissions->end(),
                                             t0 * kPsPerSecond);
            const auto hi = std::lower_bound(lo, emissions->end(), t1 * kPsPerSecond);
            begin = emissions->data() + (lo - emissions->begin());
            end = emissions->data() + (hi - emissions->begin());
        }
        simulate_slice(ctx, static_cast<std::uint64_t>(i), t0, t1, begin, end,
                       slices[static_cast<std::size_t>(i)]);
    };

    if (cfg.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::int64_t i = 0; i < n_slices; ++i) run_one(i);
    } else {
        for (std::int64_t i = 0; i < n_slices; ++i) run_one(i);
    }

    DetectionResult result;
    std::size_t total1 = 0, total2 = 0, total_truth = 0;
    for (const SliceOutput& s : slices) {
        total1 += s.tags1.size();
        total2 += s.tags2.size();
        total_truth += s.truth.size();
    }
    result.tags1.reserve(total1);
    result.tags2.reserve(total2);
    result.truth.reserve(total_truth);
    std::int64_t pair_base = 0;
    for (SliceOutput& s : slices) {
        for (TimeTag tag : s.tags1) {
            if (tag.pair_id >= 0) tag.pair_id += static_cast<std::int32_t>(pair_base);
            result.tags1.push_back(tag);
        }
        for (TimeTag tag : s.tags2) {
            if (tag.pair_id >= 0) tag.pair_id += static_cast<std::int32_t>(pair_base);
            result.tags2.push_back(tag);
        }
        for (GroundTruthPair row : s.truth) {
            row.pair_id += pair_base;
            result.truth.push_back(row);
        }
        pair_base += static_cast<std::int64_t>(s.truth.size());
        s = SliceOutput{};  // release slice memory as we go
    }
    std::sort(result.tags1.begin(), result.tags1.end(), tag_less);
    std::sort(result.tags2.begin(), result.tags2.end(), tag_less);
    for (const auto* tags : {&result.tags1, &result.tags2}) {
        if (!tags->empty() && tags->front().time_ps < 0) {
            throw std::runtime_error(
                "simulation produced a negative local time; clock offset too negative for the "
                "simulated interval");
        }
    }
    return result;
}

}  // namespace

void validate(const DetectorParams& params) {
    if (!(params.efficiency > 0.0 && params.efficiency <= 1.0)) {
        throw std::invalid_argument("detector: efficiency must lie in (0, 1]");
    }
    if (!(params.dark_rate_hz >= 0.0 && params.dark_rate_hz <= 20.0)) {
        throw std::invalid_argument("detector: dark_rate_hz must lie in [0, 20]");
    }
    if (!(params.background_rate_hz >= 0.0 && params.background_rate_hz <= 1e5)) {
        throw std::invalid_argument("detector: background_rate_hz must lie in [0, 1e5]");
    }
    if (!(params.time_jitter_sigma_ps >= 0.0)) {
        throw std::invalid_argument("detector: time_jitter_sigma_ps must be >= 0");
    }
}

void validate(const QrngParams& params) {
    if (!(params.decision_rate_hz > 0.0)) {
        throw std::invalid_argument("qrng: decision_rate_hz must be > 0");
    }
    if (!(params.output_delay_min_s >= 0.0) ||
        !(params.output_delay_min_s <= params.output_delay_max_s)) {
        throw std::invalid_argument("qrng: output delay range must satisfy 0 <= min <= max");
    }
}

void validate(const ClockModel& model) {
    if (!(model.sync_pulse_rate_hz > 0.0)) {
        throw std::invalid_argument("clock: sync_pulse_rate_hz must be > 0");
    }
    if (!(model.sync_jitter_sigma_ps >= 0.0)) {
        throw std::invalid_argument("clock: sync_jitter_sigma_ps must be >= 0");
    }
}

QrngSchedule::QrngSchedule(const QrngParams& params, int n_angles, std::uint64_t seed,
                           std::uint64_t stream)
    : params_(params), n_angles_(n_angles), seed_(seed), stream_(stream) {
    validate(params);
    if (n_angles < 1) {
        throw std::invalid_argument("qrng schedule: need at least one angle");
    }
    if (params.output_delay_max_s > 1.0 / params.decision_rate_hz) {
        throw std::invalid_argument(
            "qrng schedule: output_delay_max_s must not exceed the decision period");
    }
}

int QrngSchedule::decision(std::int64_t tick) const {
    CounterRng rng(seed_, static_cast<std::uint64_t>(tick), stream_);
    return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_angles_)));
}

double QrngSchedule::activation_s(std::int64_t tick) const {
    CounterRng rng(seed_, static_cast<std::uint64_t>(tick), stream_);
    rng.next_u64();  // skip the decision draw
    return static_cast<double>(tick) / params_.decision_rate_hz +
           rng.uniform(params_.output_delay_min_s, params_.output_delay_max_s);
}

int QrngSchedule::basis_index_at(double t_true_s) const {
    const std::int64_t tick =
        static_cast<std::int64_t>(std::floor(t_true_s * params_.decision_rate_hz));
    return t_true_s >= activation_s(tick) ? decision(tick) : decision(tick - 1);
}

std::vector<double> emit_pairs(double rate_pairs_per_s, double duration_s, std::uint64_t seed) {
    if (!(rate_pairs_per_s > 0.0) || !(duration_s >= 0.0)) {
        throw std::invalid_argument("emit_pairs: rate must be > 0 and duration >= 0");
    }
    // Same slice scheme as the full simulation: per-slice substreams, so the
    // output is independent of execution order.
    const double slice_s = 0.25;
    const std::int64_t n_slices = static_cast<std::int64_t>(std::ceil(duration_s / slice_s));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rate_pairs_per_s * duration_s * 1.01) + 16);
    for (std::int64_t i = 0; i < n_slices; ++i) {
        const double t0 = static_cast<double>(i) * slice_s;
        const double t1 = std::min(duration_s, t0 + slice_s);
        CounterRng rng(seed, static_cast<std::uint64_t>(i), kStreamEmission);
        double t_ps = t0 * kPsPerSecond;
        const double t1_ps = t1 * kPsPerSecond;
        while (true) {
            t_ps += rng.exponential(rate_pairs_per_s) * kPsPerSecond;
            if (t_ps >= t1_ps) break;
            out.push_back(t_ps);
        }
    }
    return out;
}

double singles_rate_estimate(double pair_rate_hz, double loss_db, const DetectorParams& det) {
    validate(det);
    if (!(pair_rate_hz >= 0.0) || !(loss_db >= 0.0)) {
        throw std::invalid_argument("singles_rate_estimate: rate and loss must be >= 0");
    }
    return pair_rate_hz * std::pow(10.0, -loss_db / 10.0) * det.efficiency + det.dark_rate_hz +
           det.background_rate_hz;
}

DetectionResult transmit_and_detect(const std::vector<double>& emissions_ps,
                                    const TwoQubitState& state, double loss1_db, double loss2_db,
                                    const std::array<DetectorParams, 4>& det,
                                    const std::array<QrngParams, 2>& qrng,
                                    const std::vector<double>& angles1_rad,
                                    const std::vector<double>& angles2_rad,
                                    const std::array<ClockModel, 2>& clocks, std::uint64_t seed,
                                    int handedness_sign) {
    if (!(loss1_db >= 0.0 && loss2_db >= 0.0)) {
        throw std::invalid_argument("transmit_and_detect: losses must be >= 0");
    }
    if (!std::is_sorted(emissions_ps.begin(), emissions_ps.end())) {
        throw std::invalid_argument("transmit_and_detect: emissions must be sorted");
    }
    SimConfig cfg;
    cfg.t_start_s = 0.0;
    cfg.t_end_s = emissions_ps.empty() ? 0.0 : emissions_ps.back() / kPsPerSecond + 1e-12;
    cfg.state = state;
    cfg.handedness_sign = handedness_sign;
    cfg.loss_t_s = {0.0};
    cfg.loss1_db = {loss1_db};
    cfg.loss2_db = {loss2_db};
    cfg.seed = seed;
    cfg.stations[0] = StationConfig{{det[0], det[1]}, qrng[0], clocks[0], angles1_rad, 0.0};
    cfg.stations[1] = StationConfig{{det[2], det[3]}, qrng[1], clocks[1], angles2_rad, 0.0};
    return run_slices(cfg, &emissions_ps);
}

DetectionResult simulate_pass(const SimConfig& config) { return run_slices(config, nullptr); }

namespace {

void append_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t read_u32(const std::string& buf, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    return v;
}

std::uint64_t read_u64(const std::string& buf, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    return v;
}

}  // namespace

void write_time_tags(const std::string& path, const std::vector<TimeTag>& tags) {
    std::string buf;
    buf.reserve(8 + tags.size() * 12);
    buf += "ETT1";
    append_u32(buf, static_cast<std::uint32_t>(tags.size()));
    for (const TimeTag& tag : tags) {
        if (tag.time_ps < 0) {
            throw std::invalid_argument("write_time_tags: negative time_ps");
        }
        append_u64(buf, static_cast<std::uint64_t>(tag.time_ps));
        buf.push_back(static_cast<char>(tag.channel));
        buf.push_back(static_cast<char>(tag.basis_index));
        buf.push_back(0);
        buf.push_back(0);
    }
    atomic_write(path, buf);
}

std::vector<TimeTag> load_time_tags(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 8 || buf.compare(0, 4, "ETT1") != 0) {
        throw std::runtime_error(path + ": not a time-tag file (bad magic at byte 0)");
    }
    const std::uint32_t count = read_u32(buf, 4);
    const std::size_t expected = 8 + static_cast<std::size_t>(count) * 12;
    if (buf.size() != expected) {
        throw std::runtime_error(path + ": size mismatch at byte " + std::to_string(buf.size()) +
                                 ", expected " + std::to_string(expected) + " bytes");
    }
    std::vector<TimeTag> tags;
    tags.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t at = 8 + static_cast<std::size_t>(i) * 12;
        const std::uint64_t time = read_u64(buf, at);
        if (time > static_cast<std::uint64_t>(INT64_MAX)) {
            throw std::runtime_error(path + ": time overflow at byte " + std::to_string(at));
        }
        const std::uint8_t channel = static_cast<std::uint8_t>(buf[at + 8]);
        const std::uint8_t basis = static_cast<std::uint8_t>(buf[at + 9]);
        if (buf[at + 10] != 0 || buf[at + 11] != 0) {
            throw std::runtime_error(path + ": nonzero reserved bytes at byte " +
                                     std::to_string(at + 10));
        }
        if (channel > 2) {
            throw std::runtime_error(path + ": bad channel at byte " + std::to_string(at + 8));
        }
        tags.push_back(TimeTag{static_cast<std::int64_t>(time), -1, channel, basis});
    }
    return tags;
}

void write_time_tags_csv(const std::string& path, const std::vector<TimeTag>& tags) {
    std::ostringstream out;
    out << "time_ps,channel,basis_index\n";
    for (const TimeTag& tag : tags) {
        out << tag.time_ps << ',' << static_cast<int>(tag.channel) << ','
            << static_cast<int>(tag.basis_index) << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<TimeTag> load_time_tags_csv(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_ps,channel,basis_index") {
        throw std::runtime_error(path + ": bad header, expected 'time_ps,channel,basis_index'");
    }
    std::vector<TimeTag> tags;
    long long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::string ctx = path + " row " + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw std::runtime_error(ctx + ": expected 3 columns");
        }
        const long long time = parse_int(fields[0], ctx);
        const long long channel = parse_int(fields[1], ctx);
        const long long basis = parse_int(fields[2], ctx);
        if (time < 0) throw std::runtime_error(ctx + ": time_ps must be >= 0");
        if (channel < 0 || channel > 2) throw std::runtime_error(ctx + ": channel must be 0..2");
        if (basis < 0 || basis > 255) throw std::runtime_error(ctx + ": basis_index must be 0..255");
        tags.push_back(TimeTag{time, -1, static_cast<std::uint8_t>(channel),
                               static_cast<std::uint8_t>(basis)});
    }
    return tags;
}

void write_ground_truth(const std::string& path, const std::vector<GroundTruthPair>& rows) {
    std::ostringstream out;
    out << "pair_id,t1_ps,t2_ps,outcome1,outcome2,basis1,basis2\n";
    for (const GroundTruthPair& r : rows) {
        out << r.pair_id << ',' << r.t1_ps << ',' << r.t2_ps << ',' << r.outcome1 << ','
            << r.outcome2 << ',' << r.basis1 << ',' << r.basis2 << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<GroundTruthPair> load_ground_truth(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "pair_id,t1_ps,t2_ps,outcome1,outcome2,basis1,basis2") {
        throw std::runtime_error(path + ": bad ground-truth header");
    }
    std::vector<GroundTruthPair> rows;
    long long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::string ctx = path + " row " + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            throw std::runtime_error(ctx + ": expected 7 columns");
        }
        GroundTruthPair r;
        r.pair_id = parse_int(fields[0], ctx);
        r.t1_ps = parse_int(fields[1], ctx);
        r.t2_ps = parse_int(fields[2], ctx);
        r.outcome1 = static_cast<int>(parse_int(fields[3], ctx));
        r.outcome2 = static_cast<int>(parse_int(fields[4], ctx));
        r.basis1 = static_cast<int>(parse_int(fields[5], ctx));
        r.basis2 = static_cast<int>(parse_int(fields[6], ctx));
        if (std::abs(r.outcome1) != 1 || std::abs(r.outcome2) != 1) {
            throw std::runtime_error(ctx + ": outcomes must be +1 or -1");
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace entdist
