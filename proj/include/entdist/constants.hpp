#pragma once

namespace entdist {

// Spherical-Earth radius used throughout the geometry and spacetime models.
inline constexpr double kEarthRadiusKm = 6371.0;

// Speed of light in vacuum.
inline constexpr double kSpeedOfLightKmPerS = 299792.458;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kPsPerSecond = 1e12;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace entdist
