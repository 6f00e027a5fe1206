#include "entdist/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "entdist/constants.hpp"
#include "entdist/io.hpp"

namespace entdist {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void validate(const GroundStation& station) {
    if (!(station.latitude_deg >= -90.0 && station.latitude_deg <= 90.0)) {
        throw std::invalid_argument("station '" + station.name +
                                    "': latitude_deg must lie in [-90, 90]");
    }
    if (!(station.longitude_deg >= -180.0 && station.longitude_deg <= 180.0)) {
        throw std::invalid_argument("station '" + station.name +
                                    "': longitude_deg must lie in [-180, 180]");
    }
    if (!(station.altitude_km >= 0.0 && station.altitude_km <= 9.0)) {
        throw std::invalid_argument("station '" + station.name +
                                    "': altitude_km must lie in [0, 9]");
    }
}

void validate(const OrbitModel& orbit) {
    if (!(orbit.altitude_km > 0.0)) {
        throw std::invalid_argument("orbit: altitude_km must be > 0");
    }
    if (!(orbit.speed_km_s > 0.0)) {
        throw std::invalid_argument("orbit: speed_km_s must be > 0");
    }
    if (!(orbit.track_point_lat_deg >= -89.9 && orbit.track_point_lat_deg <= 89.9)) {
        throw std::invalid_argument("orbit: track_point_lat_deg must lie in [-89.9, 89.9]");
    }
}

Vec3 station_position(const GroundStation& station) {
    const double r = kEarthRadiusKm + station.altitude_km;
    const double lat = deg_to_rad(station.latitude_deg);
    const double lon = deg_to_rad(station.longitude_deg);
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon),
            r * std::sin(lat)};
}

Vec3 station_up(const GroundStation& station) { return normalized(station_position(station)); }

Vec3 satellite_position(const OrbitModel& orbit, double t_s) {
    const double r_orbit = kEarthRadiusKm + orbit.altitude_km;
    const double lat = deg_to_rad(orbit.track_point_lat_deg);
    const double lon = deg_to_rad(orbit.track_point_lon_deg);
    const Vec3 radial{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                      std::sin(lat)};
    // Local tangent frame at the track point; the orbit plane contains the
    // radial direction and the azimuth direction (degrees east of north).
    const Vec3 east = normalized(cross(Vec3{0.0, 0.0, 1.0}, radial));
    const Vec3 north = cross(radial, east);
    const double az = deg_to_rad(orbit.track_azimuth_deg);
    const Vec3 along = std::cos(az) * north + std::sin(az) * east;

    const double omega = orbit.speed_km_s / r_orbit;  // angular rate, rad/s
    const double phase = omega * (t_s - orbit.epoch_s);
    return r_orbit * (std::cos(phase) * radial + std::sin(phase) * along);
}

double slant_range_km(const Vec3& satellite_pos_km, const GroundStation& station) {
    if (norm(satellite_pos_km) < kEarthRadiusKm + station.altitude_km) {
        throw std::domain_error("satellite position lies inside the Earth sphere");
    }
    return norm(satellite_pos_km - station_position(station));
}

double elevation_angle_deg(const Vec3& satellite_pos_km, const GroundStation& station) {
    const Vec3 to_sat = satellite_pos_km - station_position(station);
    const double sin_elev = dot(station_up(station), to_sat) / norm(to_sat);
    return rad_to_deg(std::asin(std::clamp(sin_elev, -1.0, 1.0)));
}

std::vector<PassSample> propagate_pass(const OrbitModel& orbit, const GroundStation& station1,
                                       const GroundStation& station2, double dt_s,
                                       double elevation_cutoff_deg) {
    validate(orbit);
    validate(station1);
    validate(station2);
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("propagate_pass: dt_s must be > 0");
    }
    if (!(elevation_cutoff_deg >= 0.0 && elevation_cutoff_deg < 90.0)) {
        throw std::invalid_argument("propagate_pass: elevation cutoff must lie in [0, 90)");
    }

    // One full orbit centered on the epoch covers any single pass. Samples
    // live on the absolute grid t = k*dt so dt-halving reproduces them.
    const double r_orbit = kEarthRadiusKm + orbit.altitude_km;
    const double period_s = 2.0 * kPi * r_orbit / orbit.speed_km_s;
    const long long k_lo = static_cast<long long>(std::ceil((orbit.epoch_s - period_s / 2) / dt_s));
    const long long k_hi = static_cast<long long>(std::floor((orbit.epoch_s + period_s / 2) / dt_s));

    std::vector<PassSample> best;
    std::vector<PassSample> run;
    auto keep_longer = [&]() {
        if (run.size() > best.size()) best = run;
        run.clear();
    };
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double t = static_cast<double>(k) * dt_s;
        const Vec3 sat = satellite_position(orbit, t);
        const double e1 = elevation_angle_deg(sat, station1);
        const double e2 = elevation_angle_deg(sat, station2);
        if (e1 >= elevation_cutoff_deg && e2 >= elevation_cutoff_deg) {
            run.push_back(PassSample{t, slant_range_km(sat, station1),
                                     slant_range_km(sat, station2), e1, e2, sat});
        } else {
            keep_longer();
        }
    }
    keep_longer();
    return best;
}

void write_ephemeris(const std::string& path, const std::vector<PassSample>& pass) {
    std::ostringstream out;
    out << "t_s,range1_km,range2_km,elev1_deg,elev2_deg,x_km,y_km,z_km\n";
    for (const PassSample& s : pass) {
        out << fmt(s.t_s) << ',' << fmt(s.range1_km) << ',' << fmt(s.range2_km) << ','
            << fmt(s.elevation1_deg) << ',' << fmt(s.elevation2_deg) << ','
            << fmt(s.satellite_pos_km.x) << ',' << fmt(s.satellite_pos_km.y) << ','
            << fmt(s.satellite_pos_km.z) << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<PassSample> load_ephemeris(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected = "t_s,range1_km,range2_km,elev1_deg,elev2_deg,x_km,y_km,z_km";
    if (line != expected) {
        throw std::runtime_error(path + ": bad header, expected '" + expected + "'");
    }

    std::vector<PassSample> pass;
    long long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::string ctx = path + " row " + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 8) {
            throw std::runtime_error(ctx + ": expected 8 columns, got " +
                                     std::to_string(fields.size()));
        }
        PassSample s;
        s.t_s = parse_double(fields[0], ctx);
        s.range1_km = parse_double(fields[1], ctx);
        s.range2_km = parse_double(fields[2], ctx);
        s.elevation1_deg = parse_double(fields[3], ctx);
        s.elevation2_deg = parse_double(fields[4], ctx);
        s.satellite_pos_km = {parse_double(fields[5], ctx), parse_double(fields[6], ctx),
                              parse_double(fields[7], ctx)};

        if (!pass.empty() && !(s.t_s > pass.back().t_s)) {
            throw std::runtime_error(ctx + ": t_s not strictly increasing");
        }
        if (!(s.range1_km > 0.0) || !(s.range2_km > 0.0)) {
            throw std::runtime_error(ctx + ": ranges must be positive");
        }
        if (std::abs(s.elevation1_deg) > 90.0 || std::abs(s.elevation2_deg) > 90.0) {
            throw std::runtime_error(ctx + ": elevations must lie in [-90, 90]");
        }
        // A slant range can never be smaller than the satellite's altitude
        // above the highest possible station (9 km).
        const double implied_altitude = norm(s.satellite_pos_km) - kEarthRadiusKm;
        const double min_range = implied_altitude - 9.0 - 1e-6;
        if (s.range1_km < min_range || s.range2_km < min_range) {
            throw std::runtime_error(ctx + ": range below the satellite altitude implied by x,y,z");
        }
        pass.push_back(s);
    }
    return pass;
}

}  // namespace entdist
