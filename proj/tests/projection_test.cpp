#include "treeloc/projection.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "treeloc/error.hpp"

namespace treeloc {
namespace {

ImageMeta make_meta(double altitude, double focal, double yaw = 0.0) {
  ImageMeta m;
  m.image_id = "a";
  m.latitude = 24.1;
  m.longitude = 47.3;
  m.altitude_m = altitude;
  m.yaw_deg = yaw;
  m.focal_px = focal;
  m.width_px = 4000;
  m.height_px = 3000;
  return m;
}

Detection box_at(double x, double y, TreeClass cls = TreeClass::kPalm) {
  return {"a", x - 50, y - 50, x + 50, y + 50, cls, 0.8};
}

// Independent oracle: cast the pixel ray from a camera at (0, 0, H) whose
// image-right axis is (cos yaw, -sin yaw) and image-down axis is the
// negated heading, then intersect the horizontal plane at the tree top.
EnuOffset ray_cast_base(double x, double y, const ImageMeta& m, double tree_h) {
  const double psi = m.yaw_deg * 3.14159265358979323846 / 180.0;
  const std::array<double, 2> right{std::cos(psi), -std::sin(psi)};
  const std::array<double, 2> heading{std::sin(psi), std::cos(psi)};
  const double u = x - m.width_px / 2.0;
  const double v = y - m.height_px / 2.0;
  // direction = u*right - v*heading + F*(0,0,-1); descend H - h.
  const double t = (m.altitude_m - tree_h) / m.focal_px;
  return {t * (u * right[0] - v * heading[0]), t * (u * right[1] - v * heading[1])};
}

TEST(PixelToOffset, CenterPixelIsZero) {
  const auto m = make_meta(60, 3600);
  const auto o = pixel_to_offset({2000, 1500}, m);
  EXPECT_EQ(o.d_x, 0.0);
  EXPECT_EQ(o.d_y, 0.0);
}

TEST(PixelToOffset, RightwardThousandPixels) {
  const auto o = pixel_to_offset({3000, 1500}, make_meta(60, 3600));
  EXPECT_NEAR(o.d_x, 16.666666666666668, 1e-12);
  EXPECT_EQ(o.d_y, 0.0);
}

TEST(PixelToOffset, PixelAboveCenterMapsForward) {
  const auto o = pixel_to_offset({2000, 600}, make_meta(100, 3600));
  EXPECT_EQ(o.d_x, 0.0);
  EXPECT_NEAR(o.d_y, 25.0, 1e-12);
}

TEST(PixelToOffset, LinearAndHomogeneous) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> px(0, 4000), py(0, 3000), k(0.1, 5);
  for (int i = 0; i < 500; ++i) {
    const auto m = make_meta(60, 3600);
    const PixelPoint p{px(rng), py(rng)};
    const auto o = pixel_to_offset(p, m);
    EXPECT_NEAR(o.d_x, (p.x - 2000) * 60 / 3600, 1e-9);
    EXPECT_NEAR(o.d_y, (1500 - p.y) * 60 / 3600, 1e-9);
    const double s = k(rng);
    auto m2 = m;
    m2.altitude_m *= s;
    const auto o2 = pixel_to_offset(p, m2);
    EXPECT_NEAR(o2.d_x, s * o.d_x, 1e-9);
    EXPECT_NEAR(o2.d_y, s * o.d_y, 1e-9);
  }
}

TEST(RotateToEnu, Examples) {
  auto e = rotate_to_enu({1.5, -2.5}, 0.0);
  EXPECT_EQ(e.east_m, 1.5);
  EXPECT_EQ(e.north_m, -2.5);
  e = rotate_to_enu({0, 10}, 90.0);
  EXPECT_EQ(e.east_m, 10.0);
  EXPECT_EQ(e.north_m, 0.0);
  e = rotate_to_enu({3, 4}, 180.0);
  EXPECT_EQ(e.east_m, -3.0);
  EXPECT_EQ(e.north_m, -4.0);
  // Heading east, image-right points south.
  e = rotate_to_enu({1, 0}, 90.0);
  EXPECT_EQ(e.east_m, 0.0);
  EXPECT_EQ(e.north_m, -1.0);
}

TEST(RotateToEnu, IsometryCompositionAndInverse) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> v(-100, 100), yaw(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    const CameraGroundOffset o{v(rng), v(rng)};
    const double a = yaw(rng), b = yaw(rng);
    const auto r = rotate_to_enu(o, a);
    EXPECT_NEAR(r.norm(), std::hypot(o.d_x, o.d_y), 1e-9);
    const auto twice = rotate_to_enu({r.east_m, r.north_m}, b);
    const auto once = rotate_to_enu(o, normalize_yaw(a + b));
    EXPECT_NEAR(twice.east_m, once.east_m, 1e-9);
    EXPECT_NEAR(twice.north_m, once.north_m, 1e-9);
    const auto back = rotate_to_camera(r, a);
    EXPECT_NEAR(back.d_x, o.d_x, 1e-9);
    EXPECT_NEAR(back.d_y, o.d_y, 1e-9);
  }
}

TEST(HeightCorrect, Examples) {
  const EnuOffset o{30, 0};
  const auto c = height_correct(o, 100, 8);
  EXPECT_NEAR(c.east_m, 27.6, 1e-12);
  EXPECT_EQ(c.north_m, 0.0);
  EXPECT_NEAR(o.norm() - c.norm(), 2.4, 1e-12);
  EXPECT_EQ(height_correct(o, 100, 0), o);
  const auto nadir = height_correct({0, 0}, 60, 12);
  EXPECT_EQ(nadir.east_m, 0.0);
  EXPECT_EQ(nadir.north_m, 0.0);
}

TEST(HeightCorrect, DegenerateGeometry) {
  for (const auto [H, h] : {std::pair{10.0, 10.0}, {10.0, 12.0}, {10.0, -1.0}}) {
    try {
      height_correct({1, 1}, H, h);
      FAIL() << H << " " << h;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kGeometry);
    }
  }
}

TEST(HeightCorrect, LinearAndMonotoneInHeight) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> v(-50, 50), h(0, 30), k(-3, 3);
  for (int i = 0; i < 500; ++i) {
    const EnuOffset a{v(rng), v(rng)}, b{v(rng), v(rng)};
    const double s = k(rng), h1 = h(rng), h2 = h(rng);
    const auto sum = height_correct({a.east_m + s * b.east_m, a.north_m + s * b.north_m}, 60, h1);
    const auto ca = height_correct(a, 60, h1);
    const auto cb = height_correct(b, 60, h1);
    EXPECT_NEAR(sum.east_m, ca.east_m + s * cb.east_m, 1e-9);
    EXPECT_NEAR(sum.north_m, ca.north_m + s * cb.north_m, 1e-9);
    if (a.norm() > 1e-6 && h1 != h2) {
      const auto lo = height_correct(a, 60, std::min(h1, h2));
      const auto hi = height_correct(a, 60, std::max(h1, h2));
      EXPECT_LT(hi.norm(), lo.norm());
    }
  }
}

TEST(Geolocate, CentralPixelIsDronePositionForAnyYaw) {
  for (const double yaw : {-179.0, -90.0, 0.0, 33.3, 180.0}) {
    const auto m = make_meta(60, 3600, yaw);
    const auto p = geolocate(box_at(2000, 1500), m, {8.0, 4.0});
    EXPECT_EQ(p, m.position()) << yaw;
  }
}

TEST(Geolocate, MatchesRayCastOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> px(60, 3940), py(60, 2940), yaw(-180, 180),
      alt(30, 120), h(0, 15);
  for (int i = 0; i < 1000; ++i) {
    auto m = make_meta(alt(rng), 3600, yaw(rng));
    const double tree_h = h(rng);
    const double x = px(rng), y = py(rng);
    const auto got = geolocate(box_at(x, y), m, {tree_h, 0.0});
    const auto expect = ray_cast_base(x, y, m, tree_h);
    const auto off = geo_offset(m.position(), got);
    EXPECT_NEAR(off.east_m, expect.east_m, 1e-6);
    EXPECT_NEAR(off.north_m, expect.north_m, 1e-6);
  }
}

TEST(Geolocate, UsesPerClassHeight) {
  const auto m = make_meta(60, 3600, 0);
  const GeolocationParams params{12.0, 0.0};
  const auto palm = geo_offset(m.position(), geolocate(box_at(3000, 1500), m, params));
  const auto other = geo_offset(
      m.position(), geolocate(box_at(3000, 1500, TreeClass::kOtherTree), m, params));
  EXPECT_NEAR(palm.east_m, 16.666666666666668 * 48 / 60, 1e-6);
  EXPECT_NEAR(other.east_m, 16.666666666666668, 1e-6);
}

TEST(GeolocateAll, ThresholdOrderingAndOrphans) {
  const std::vector<ImageMeta> manifest{make_meta(60, 3600)};
  std::vector<Detection> dets{box_at(100, 100), box_at(2000, 1500), box_at(300, 300)};
  dets[1].confidence = 0.1;
  const auto all = geolocate_all(dets, manifest, {6, 4});
  ASSERT_EQ(all.size(), 3u);
  const auto kept = geolocate_all(dets, manifest, {6, 4}, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].detection_index, 0u);
  EXPECT_EQ(kept[1].detection_index, 2u);

  dets.push_back({"missing", 0, 0, 1, 1, TreeClass::kPalm, 1.0});
  try {
    geolocate_all(dets, manifest, {6, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'missing'"), std::string::npos);
  }
}

TEST(GeolocatedFormats, GeoJsonAndCsvReparse) {
  const std::vector<ImageMeta> manifest{make_meta(60, 3600, 37)};
  std::vector<Detection> dets;
  for (int i = 0; i < 20; ++i) {
    dets.push_back(box_at(100 + 150 * i, 100 + 120 * i,
                          i % 3 ? TreeClass::kPalm : TreeClass::kOtherTree));
  }
  const auto g = geolocate_all(dets, manifest, {6, 4});
  const auto geojson = write_geolocated_geojson(g);
  EXPECT_EQ(parse_geolocated(geojson), g);
  EXPECT_EQ(write_geolocated_geojson(parse_geolocated(geojson)), geojson);
  const auto csv = write_geolocated_csv(g);
  EXPECT_EQ(parse_geolocated(csv), g);
  EXPECT_TRUE(parse_geolocated(write_geolocated_geojson({})).empty());
}

}  // namespace
}  // namespace treeloc
