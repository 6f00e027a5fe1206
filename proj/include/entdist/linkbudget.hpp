#pragma once

#include <string>
#include <vector>

#include "entdist/geometry.hpp"

namespace entdist {

// Optical parameters of one satellite-to-ground downlink.
struct LinkParams {
    double divergence_full_angle_rad = 10e-6;    // transmit beam e^-2 full angle
    double tx_optics_efficiency = 0.5;           // transmitter telescope throughput
    double rx_aperture_diameter_m = 1.2;         // receiving telescope clear aperture
    double rx_optics_efficiency = 0.5;           // receiver telescope throughput
    double detector_efficiency = 0.5;            // single-photon detector efficiency
    double pointing_jitter_sigma_rad = 0.41e-6;  // per-axis RMS residual tracking error
    double zenith_atmospheric_transmission = 0.7;
    double filter_transmission = 0.9;            // narrow-band spectral filter
};

// One time sample of the combined two-downlink attenuation.
struct AttenuationSample {
    double t_s = 0.0;
    double loss1_db = 0.0;
    double loss2_db = 0.0;
    double total_db = 0.0;  // always loss1_db + loss2_db
};

// Throws std::invalid_argument naming the offending field.
void validate(const LinkParams& params);

// Collection loss of a Gaussian beam truncated by a circular aperture:
// -10*log10(1 - exp(-2 r^2 / w^2)) with w the e^-2 beam radius at the
// given range and r the aperture radius. Requires range > 0.
double diffraction_loss_db(double range_km, double divergence_full_angle_rad,
                           double rx_aperture_diameter_m);

// Expected on-axis loss under isotropic bivariate Gaussian pointing error
// with per-axis RMS sigma: -10*log10(1 / (1 + 8 sigma^2 / theta^2)).
double pointing_loss_db(double jitter_sigma_rad, double divergence_full_angle_rad);

// Plane-parallel airmass scaling of the zenith transmission:
// -10*log10(T^(1/sin e)). Requires elevation >= 5 degrees (model validity).
double atmospheric_loss_db(double elevation_deg, double zenith_transmission);

// Total single-downlink loss for station `which` (1 or 2) at one pass sample:
// diffraction + pointing + atmosphere + all static efficiency fractions in dB.
double downlink_loss_db(const PassSample& sample, int which, const LinkParams& params);

// Per-sample combined attenuation over a pass.
std::vector<AttenuationSample> two_downlink_attenuation(const std::vector<PassSample>& pass,
                                                        const LinkParams& params1,
                                                        const LinkParams& params2);

// Orders of magnitude by which the satellite links beat a straight fiber of
// the same ground separation: (fiber_db_per_km * separation - satellite_db)/10.
double fiber_comparison_orders(double ground_separation_km, double fiber_loss_db_per_km,
                               double satellite_total_db);

// CSV round-trip, header `t_s,loss1_db,loss2_db,total_db`. Writers are atomic
// (temp file + rename); the loader throws std::runtime_error naming the
// offending row (data rows numbered from 1).
void write_attenuation(const std::string& path, const std::vector<AttenuationSample>& samples);
std::vector<AttenuationSample> load_attenuation(const std::string& path);

}  // namespace entdist
