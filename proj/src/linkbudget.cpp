#include "entdist/linkbudget.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "entdist/constants.hpp"
#include "entdist/io.hpp"

namespace entdist {

namespace {

void check_fraction(double value, const char* name) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string("link: ") + name + " must lie in (0, 1]");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void validate(const LinkParams& params) {
    if (!(params.divergence_full_angle_rad > 0.0)) {
        throw std::invalid_argument("link: divergence_full_angle_rad must be > 0");
    }
    if (!(params.rx_aperture_diameter_m > 0.0)) {
        throw std::invalid_argument("link: rx_aperture_diameter_m must be > 0");
    }
    if (!(params.pointing_jitter_sigma_rad >= 0.0)) {
        throw std::invalid_argument("link: pointing_jitter_sigma_rad must be >= 0");
    }
    check_fraction(params.tx_optics_efficiency, "tx_optics_efficiency");
    check_fraction(params.rx_optics_efficiency, "rx_optics_efficiency");
    check_fraction(params.detector_efficiency, "detector_efficiency");
    check_fraction(params.zenith_atmospheric_transmission, "zenith_atmospheric_transmission");
    check_fraction(params.filter_transmission, "filter_transmission");
}

double diffraction_loss_db(double range_km, double divergence_full_angle_rad,
                           double rx_aperture_diameter_m) {
    if (!(range_km > 0.0)) {
        throw std::invalid_argument("diffraction_loss_db: range must be > 0");
    }
    // e^-2 beam radius at the receiver and aperture radius, in meters.
    const double w = 0.5 * divergence_full_angle_rad * range_km * 1000.0;
    const double r = 0.5 * rx_aperture_diameter_m;
    const double collected = -std::expm1(-2.0 * r * r / (w * w));
    return -10.0 * std::log10(collected);
}

double pointing_loss_db(double jitter_sigma_rad, double divergence_full_angle_rad) {
    if (!(jitter_sigma_rad >= 0.0)) {
        throw std::invalid_argument("pointing_loss_db: jitter must be >= 0");
    }
    const double theta = divergence_full_angle_rad;
    const double f = 1.0 / (1.0 + 8.0 * jitter_sigma_rad * jitter_sigma_rad / (theta * theta));
    return -10.0 * std::log10(f);
}

double atmospheric_loss_db(double elevation_deg, double zenith_transmission) {
    if (!(elevation_deg >= 5.0)) {
        throw std::invalid_argument(
            "atmospheric_loss_db: model is unsupported below 5 degrees elevation");
    }
    check_fraction(zenith_transmission, "zenith_transmission");
    const double airmass = 1.0 / std::sin(deg_to_rad(elevation_deg));
    return -10.0 * airmass * std::log10(zenith_transmission);
}

double downlink_loss_db(const PassSample& sample, int which, const LinkParams& params) {
    validate(params);
    if (which != 1 && which != 2) {
        throw std::invalid_argument("downlink_loss_db: station selector must be 1 or 2");
    }
    const double range_km = which == 1 ? sample.range1_km : sample.range2_km;
    const double elevation_deg = which == 1 ? sample.elevation1_deg : sample.elevation2_deg;

    const double efficiencies = params.tx_optics_efficiency * params.rx_optics_efficiency *
                                params.detector_efficiency * params.filter_transmission;
    return diffraction_loss_db(range_km, params.divergence_full_angle_rad,
                               params.rx_aperture_diameter_m) +
           pointing_loss_db(params.pointing_jitter_sigma_rad, params.divergence_full_angle_rad) +
           atmospheric_loss_db(elevation_deg, params.zenith_atmospheric_transmission) +
           -10.0 * std::log10(efficiencies);
}

std::vector<AttenuationSample> two_downlink_attenuation(const std::vector<PassSample>& pass,
                                                        const LinkParams& params1,
                                                        const LinkParams& params2) {
    if (pass.empty()) {
        throw std::invalid_argument("two_downlink_attenuation: empty pass");
    }
    std::vector<AttenuationSample> out;
    out.reserve(pass.size());
    for (const PassSample& s : pass) {
        AttenuationSample a;
        a.t_s = s.t_s;
        a.loss1_db = downlink_loss_db(s, 1, params1);
        a.loss2_db = downlink_loss_db(s, 2, params2);
        a.total_db = a.loss1_db + a.loss2_db;
        out.push_back(a);
    }
    return out;
}

double fiber_comparison_orders(double ground_separation_km, double fiber_loss_db_per_km,
                               double satellite_total_db) {
    if (!(ground_separation_km > 0.0) || !(fiber_loss_db_per_km > 0.0) ||
        !(satellite_total_db > 0.0)) {
        throw std::invalid_argument("fiber_comparison_orders: inputs must be positive");
    }
    return (fiber_loss_db_per_km * ground_separation_km - satellite_total_db) / 10.0;
}

void write_attenuation(const std::string& path, const std::vector<AttenuationSample>& samples) {
    std::ostringstream out;
    out << "t_s,loss1_db,loss2_db,total_db\n";
    for (const AttenuationSample& a : samples) {
        out << fmt(a.t_s) << ',' << fmt(a.loss1_db) << ',' << fmt(a.loss2_db) << ','
            << fmt(a.total_db) << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<AttenuationSample> load_attenuation(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected = "t_s,loss1_db,loss2_db,total_db";
    if (line != expected) {
        throw std::runtime_error(path + ": bad header, expected '" + expected + "'");
    }
    std::vector<AttenuationSample> samples;
    long long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::string ctx = path + " row " + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw std::runtime_error(ctx + ": expected 4 columns, got " +
                                     std::to_string(fields.size()));
        }
        AttenuationSample a;
        a.t_s = parse_double(fields[0], ctx);
        a.loss1_db = parse_double(fields[1], ctx);
        a.loss2_db = parse_double(fields[2], ctx);
        a.total_db = parse_double(fields[3], ctx);
        if (a.loss1_db < 0.0 || a.loss2_db < 0.0) {
            throw std::runtime_error(ctx + ": losses must be >= 0");
        }
        if (std::abs(a.total_db - (a.loss1_db + a.loss2_db)) > 1e-6) {
            throw std::runtime_error(ctx + ": total_db does not equal loss1_db + loss2_db");
        }
        if (!samples.empty() && !(a.t_s > samples.back().t_s)) {
            throw std::runtime_error(ctx + ": t_s not strictly increasing");
        }
        samples.push_back(a);
    }
    return samples;
}

}  // namespace entdist
