#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "entdist/quantum.hpp"
#include "entdist/rng.hpp"

namespace entdist {

// Single-photon detector behind one analyzer output port.
struct DetectorParams {
    double efficiency = 1.0;            // fraction in (0, 1]
    double dark_rate_hz = 0.0;          // in [0, 20]
    double background_rate_hz = 0.0;    // in [0, 1e5]
    double time_jitter_sigma_ps = 0.0;  // Gaussian timing jitter
};

// Random-number source driving the basis switch at one station.
struct QrngParams {
    double decision_rate_hz = 5000.0;   // new basis choice per tick
    double output_delay_min_s = 0.0;    // choice applies after this delay
    double output_delay_max_s = 200e-9;
};

// Station-local clock relating true time T (s) to local tag time:
// local_ps = T*1e12 + offset_ps + drift_ps_per_s * T.
struct ClockModel {
    double offset_ps = 0.0;
    double drift_ps_per_s = 0.0;
    double sync_pulse_rate_hz = 10000.0;
    double sync_jitter_sigma_ps = 0.0;
};

// One detection (or sync pulse) in a station-local stream. channel 0 is the
// "+" analyzer port, 1 the "-" port, 2 the sync channel. pair_id is a
// ground-truth label used only by tests; it never enters the wire format.
struct TimeTag {
    std::int64_t time_ps = 0;
    std::int32_t pair_id = -1;
    std::uint8_t channel = 0;
    std::uint8_t basis_index = 0;
};

// Both-photons-detected emission, written to the ground-truth side table.
// Outcomes are +1 ("+" port) or -1 ("-" port). Times are station-local ps.
struct GroundTruthPair {
    std::int64_t pair_id = 0;
    std::int64_t t1_ps = 0;
    std::int64_t t2_ps = 0;
    int outcome1 = 0;
    int outcome2 = 0;
    int basis1 = 0;
    int basis2 = 0;
};

struct DetectionResult {
    std::vector<TimeTag> tags1;
    std::vector<TimeTag> tags2;
    std::vector<GroundTruthPair> truth;
};

// Everything one station contributes to the simulation.
struct StationConfig {
    std::array<DetectorParams, 2> detectors{};  // ports "+" and "-"
    QrngParams qrng{};
    ClockModel clock{};
    std::vector<double> angles_rad;      // analyzer angles selectable by the QRNG
    double propagation_delay_ps = 0.0;   // constant per-link placeholder
};

// Full simulation description. Loss curves are sampled at loss_t_s and
// linearly interpolated; a single sample means constant loss. Simulation time
// is cut into slice_s-long slices, each with independent counter-based random
// substreams, so output is bit-identical for a fixed seed regardless of how
// many threads execute the slices.
struct SimConfig {
    double t_start_s = 0.0;
    double t_end_s = 0.0;
    double slice_s = 0.25;
    double pair_rate_hz = 0.0;
    TwoQubitState state;
    int handedness_sign = +1;
    std::array<StationConfig, 2> stations{};
    std::vector<double> loss_t_s{0.0};
    std::vector<double> loss1_db{0.0};
    std::vector<double> loss2_db{0.0};
    std::uint64_t seed = 1;
    bool parallel = true;  // false selects the serial reference path
};

// Throws std::invalid_argument naming the violated field.
void validate(const DetectorParams& params);
void validate(const QrngParams& params);
void validate(const ClockModel& model);

// Piecewise-constant basis schedule derived from counter-based hashing of
// (seed, stream, tick): decision k is drawn at true time k/rate and becomes
// active at k/rate + delay_k with delay_k uniform in [min, max]. Requires
// output_delay_max <= 1/decision_rate so activations stay ordered.
class QrngSchedule {
  public:
    QrngSchedule(const QrngParams& params, int n_angles, std::uint64_t seed,
                 std::uint64_t stream);
    int decision(std::int64_t tick) const;        // basis index chosen at tick
    double activation_s(std::int64_t tick) const; // when that choice applies
    int basis_index_at(double t_true_s) const;    // active index at time t

  private:
    QrngParams params_;
    int n_angles_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Homogeneous Poisson emission times in ps over [0, duration]; deterministic
// for a fixed seed and independent of execution parallelism.
std::vector<double> emit_pairs(double rate_pairs_per_s, double duration_s, std::uint64_t seed);

// Expected singles rate at one detector: pair_rate * 10^(-loss/10) * efficiency
// + dark_rate + background_rate.
double singles_rate_estimate(double pair_rate_hz, double loss_db, const DetectorParams& det);

// Transports pre-generated emissions through two constant-loss links.
// det is ordered {station1 "+", station1 "-", station2 "+", station2 "-"}.
// Survival probability per photon is 10^(-loss/10) * port efficiency;
// outcomes follow the joint Born distribution when both photons survive and
// the marginal when only one does; dark/background, sync pulses, detector
// jitter, and clock offset/drift are applied per station.
DetectionResult transmit_and_detect(const std::vector<double>& emissions_ps,
                                    const TwoQubitState& state, double loss1_db, double loss2_db,
                                    const std::array<DetectorParams, 4>& det,
                                    const std::array<QrngParams, 2>& qrng,
                                    const std::vector<double>& angles1_rad,
                                    const std::vector<double>& angles2_rad,
                                    const std::array<ClockModel, 2>& clocks, std::uint64_t seed,
                                    int handedness_sign = +1);

// Full simulation: generates emissions slice by slice (never materializing
// the whole emission list) and applies the same transport model with
// time-varying loss. This is the path used for whole-pass runs.
DetectionResult simulate_pass(const SimConfig& config);

// Binary tag file: magic "ETT1", u32 record count, then 12-byte records
// (u64 time_ps, u8 channel, u8 basis_index, u16 reserved = 0), little-endian.
// Writers are atomic; loaders throw std::runtime_error with a byte offset.
void write_time_tags(const std::string& path, const std::vector<TimeTag>& tags);
std::vector<TimeTag> load_time_tags(const std::string& path);

// CSV alternative, header `time_ps,channel,basis_index`.
void write_time_tags_csv(const std::string& path, const std::vector<TimeTag>& tags);
std::vector<TimeTag> load_time_tags_csv(const std::string& path);

// Ground-truth CSV, header `pair_id,t1_ps,t2_ps,outcome1,outcome2,basis1,basis2`.
void write_ground_truth(const std::string& path, const std::vector<GroundTruthPair>& rows);
std::vector<GroundTruthPair> load_ground_truth(const std::string& path);

}  // namespace entdist
