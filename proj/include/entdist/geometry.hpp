#pragma once

#include <string>
#include <vector>

#include <entdist/vec3.hpp>

namespace entdist {

struct GroundStation {
  std::string name;
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // [-180, 180]
  double altitude_km = 0.0;    // [0, 9]
};

// Throws std::invalid_argument if any field is out of range.
void validate(const GroundStation& station);

// Circular orbit over a spherical Earth. The ground track is a great circle,
// parameterized by the sub-satellite point at `epoch_s` and the direction of
// motion there (degrees east of north). The two track parameters are fit once
// per scenario (see scripts/calibrate_reference.py) and live in the scenario
// file, not in code.
struct OrbitModel {
  double altitude_km = 500.0;
  double speed_km_s = 7.6;
  double track_point_lat_deg = 0.0;
  double track_point_lon_deg = 0.0;
  double track_azimuth_deg = 0.0;
  double epoch_s = 0.0;
};

void validate(const OrbitModel& orbit);

struct PassSample {
  double t_s = 0.0;  // scenario time; the grid is anchored at t = 0 so samples
                     // at shared timestamps are identical across dt choices
  double range1_km = 0.0;
  double range2_km = 0.0;
  double elevation1_deg = 0.0;
  double elevation2_deg = 0.0;
  Vec3 satellite_pos_km;
};

// Earth-centered position of a station (km).
Vec3 station_position(const GroundStation& station);

// Unit vector pointing to the local zenith of a station.
Vec3 station_up(const GroundStation& station);

// Satellite position at scenario time t (km, Earth-centered frame).
Vec3 satellite_position(const OrbitModel& orbit, double t_s);

// Euclidean distance from the satellite to the station.
// Throws std::domain_error if the satellite position is inside the Earth
// sphere at the station's altitude.
double slant_range_km(const Vec3& satellite_pos_km, const GroundStation& station);

// Angle of the station->satellite vector above the local horizontal (deg).
double elevation_angle_deg(const Vec3& satellite_pos_km, const GroundStation& station);

// Samples the interval where BOTH stations see the satellite at or above the
// elevation cutoff. Samples sit on the absolute grid t = k*dt so halving dt
// reproduces the original samples exactly. Returns an empty vector when the
// orbit never rises above the cutoff for both stations simultaneously.
std::vector<PassSample> propagate_pass(const OrbitModel& orbit,
                                       const GroundStation& station1,
                                       const GroundStation& station2,
                                       double dt_s,
                                       double elevation_cutoff_deg);

// Ephemeris CSV (header t_s,range1_km,range2_km,elev1_deg,elev2_deg,x_km,y_km,z_km).
// load_ephemeris validates monotone t and range plausibility and throws
// std::runtime_error naming the offending row.
std::vector<PassSample> load_ephemeris(const std::string& path);
void write_ephemeris(const std::string& path, const std::vector<PassSample>& pass);

}  // namespace entdist
