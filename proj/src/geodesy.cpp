#include "treeloc/geodesy.hpp"

#include <cmath>
#include <string>

#include "treeloc/error.hpp"

namespace treeloc {

namespace {

double wrap_longitude_delta(double delta_deg) {
  if (delta_deg > 180.0) return delta_deg - 360.0;
  if (delta_deg < -180.0) return delta_deg + 360.0;
  return delta_deg;
}

double wrap_longitude(double lon_deg) {
  if (lon_deg > 180.0) return lon_deg - 360.0;
  if (lon_deg < -180.0) return lon_deg + 360.0;
  return lon_deg;
}

void check_offset(const EnuOffset& o) {
  if (!std::isfinite(o.east_m) || !std::isfinite(o.north_m)) {
    fail(ErrorKind::kValidation, "offset components must be finite");
  }
  if (std::abs(o.east_m) > kMaxLocalOffsetM ||
      std::abs(o.north_m) > kMaxLocalOffsetM) {
    fail(ErrorKind::kRange, "offset (" + std::to_string(o.east_m) + ", " +
                                std::to_string(o.north_m) +
                                ") m exceeds the 10 km local-plane limit");
  }
}

}  // namespace

double EnuOffset::norm() const { return std::hypot(east_m, north_m); }

namespace wgs84 {

double meridional_radius(double latitude_rad) {
  const double s = std::sin(latitude_rad);
  const double w = 1.0 - kEccentricitySq * s * s;
  return kSemiMajorAxis * (1.0 - kEccentricitySq) / (w * std::sqrt(w));
}

double prime_vertical_radius(double latitude_rad) {
  const double s = std::sin(latitude_rad);
  return kSemiMajorAxis / std::sqrt(1.0 - kEccentricitySq * s * s);
}

}  // namespace wgs84

void validate_geo_point(const GeoPoint& p) {
  if (!std::isfinite(p.latitude) || p.latitude < -90.0 || p.latitude > 90.0) {
    fail(ErrorKind::kValidation,
         "latitude " + std::to_string(p.latitude) + " outside [-90, 90]");
  }
  if (!std::isfinite(p.longitude) || p.longitude < -180.0 ||
      p.longitude > 180.0) {
    fail(ErrorKind::kValidation,
         "longitude " + std::to_string(p.longitude) + " outside [-180, 180]");
  }
}

EnuOffset geo_offset(const GeoPoint& origin, const GeoPoint& target) {
  validate_geo_point(origin);
  validate_geo_point(target);
  const double phi = deg_to_rad(origin.latitude);
  const double d_lat = deg_to_rad(target.latitude - origin.latitude);
  const double d_lon =
      deg_to_rad(wrap_longitude_delta(target.longitude - origin.longitude));
  EnuOffset out{d_lon * wgs84::prime_vertical_radius(phi) * std::cos(phi),
                d_lat * wgs84::meridional_radius(phi)};
  check_offset(out);
  return out;
}

GeoPoint geo_apply(const GeoPoint& origin, const EnuOffset& offset) {
  validate_geo_point(origin);
  check_offset(offset);
  const double phi = deg_to_rad(origin.latitude);
  const double lat =
      origin.latitude + rad_to_deg(offset.north_m / wgs84::meridional_radius(phi));
  if (lat < -90.0 || lat > 90.0) {
    fail(ErrorKind::kRange,
         "resulting latitude " + std::to_string(lat) + " outside [-90, 90]");
  }
  double lon = origin.longitude;
  if (offset.east_m != 0.0) {
    const double parallel = wgs84::prime_vertical_radius(phi) * std::cos(phi);
    if (parallel < 1e-6) {
      fail(ErrorKind::kRange, "east offset is undefined at the pole");
    }
    lon = wrap_longitude(lon + rad_to_deg(offset.east_m / parallel));
  }
  return {lat, lon};
}

}  // namespace treeloc
