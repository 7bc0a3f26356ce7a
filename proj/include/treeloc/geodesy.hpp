#pragma once

namespace treeloc {

/// WGS84 geographic coordinate in decimal degrees.
struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Local east-north tangent-plane offset in meters.
struct EnuOffset {
  double east_m = 0.0;
  double north_m = 0.0;

  double norm() const;

  friend bool operator==(const EnuOffset&, const EnuOffset&) = default;
};

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);

/// Meridional radius of curvature M(phi), meters.
double meridional_radius(double latitude_rad);
/// Prime-vertical radius of curvature N(phi), meters.
double prime_vertical_radius(double latitude_rad);
}  // namespace wgs84

/// Largest per-axis offset the small-offset model accepts.
inline constexpr double kMaxLocalOffsetM = 10000.0;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Throws kValidation unless latitude/longitude are finite and in range.
void validate_geo_point(const GeoPoint& p);

/// Offset of `target` from `origin` using the curvature radii at the origin
/// latitude. Longitude differences are wrapped across the antimeridian.
EnuOffset geo_offset(const GeoPoint& origin, const GeoPoint& target);

/// Exact inverse of geo_offset for a fixed origin.
GeoPoint geo_apply(const GeoPoint& origin, const EnuOffset& offset);

}  // namespace treeloc
