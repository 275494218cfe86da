#include <gtest/gtest.h>

#include <random>

#include "gliderkit/geo.hpp"
#include "gliderkit/timeutil.hpp"
#include "support.hpp"

using namespace gliderkit;

TEST(Projection, OriginMapsToZero) {
  const CoordRef ref({-74.7, 36.3});
  const LocalPoint q = ref.to_local({-74.7, 36.3});
  EXPECT_EQ(q.x_km, 0.0);
  EXPECT_EQ(q.y_km, 0.0);
}

TEST(Projection, OneDegreeEastAtEquator) {
  const CoordRef ref({0.0, 0.0});
  const LocalPoint q = ref.to_local({1.0, 0.0});
  EXPECT_NEAR(q.x_km, 111.320, 1e-12);
  EXPECT_NEAR(q.y_km, 0.0, 1e-12);
}

TEST(Projection, HandMultipliedOffset) {
  const CoordRef ref({0.0, 0.0});
  const LocalPoint q = ref.to_local({0.5, -0.25});
  EXPECT_NEAR(q.x_km, 0.5 * 111.320, 1e-12);
  EXPECT_NEAR(q.y_km, -0.25 * 110.574, 1e-12);
  EXPECT_NEAR(q.y_km, -27.6435, 1e-12);
}

TEST(Projection, AgreesWithHaversineNearTheOrigin) {
  const double sphere_km_per_deg = 6371.0088 * std::numbers::pi / 180.0;
  const double kNorthRatio = 110.574 / sphere_km_per_deg, kEastRatio = 111.320 / sphere_km_per_deg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat0(-60.0, 60.0), lon0(-170.0, 170.0), off(-0.5, 0.5);
  for (int k = 0; k < 2000; ++k) {
    const GeoPoint o{lon0(rng), lat0(rng)};
    const GeoPoint p{o.lon_deg + off(rng), o.lat_deg + off(rng)};
    const CoordRef ref(o);
    const double planar = std::hypot(ref.to_local(p).x_km, ref.to_local(p).y_km);
    const double sphere = testkit::haversine_km(o, p);
    if (sphere < 1.0) continue;
    // The projection's kilometres per degree are ellipsoidal (110.574 north,
    // 111.320 east at the equator) while the oracle is a mean sphere, so the
    // ratio must sit between the two per-axis scale ratios.
    EXPECT_GE(planar / sphere, kNorthRatio - 5e-4) << "origin " << o.lon_deg << "," << o.lat_deg;
    EXPECT_LE(planar / sphere, kEastRatio + 5e-4) << "origin " << o.lon_deg << "," << o.lat_deg;
  }
}

TEST(Projection, RoundTripWithinTolerance) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lat0(-70.0, 70.0), lon0(-175.0, 175.0), off(-5.0, 5.0);
  for (int k = 0; k < 10000; ++k) {
    const GeoPoint o{lon0(rng), lat0(rng)};
    const GeoPoint p{o.lon_deg + off(rng), o.lat_deg + off(rng)};
    const CoordRef ref(o);
    const GeoPoint back = ref.to_geo(ref.to_local(p));
    ASSERT_NEAR(back.lon_deg, p.lon_deg, 1e-9);
    ASSERT_NEAR(back.lat_deg, p.lat_deg, 1e-9);
  }
}

TEST(Projection, PolarOriginIsDegenerate) {
  const CoordRef ref({10.0, 90.0});
  EXPECT_THROW((void)ref.to_geo({1.0, 1.0}), DegenerateError);
}

TEST(Projection, OutsideWindowIsRangeError) {
  const CoordRef ref({0.0, 0.0});
  EXPECT_THROW((void)ref.to_local({5.5, 0.0}), RangeError);
  EXPECT_THROW((void)ref.to_local({0.0, -6.0}), RangeError);
  EXPECT_NO_THROW((void)ref.to_local({5.0, -5.0}));
}

TEST(Distance, MetricProperties) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  const CoordRef ref({-74.6, 36.3});
  for (int k = 0; k < 1000; ++k) {
    const GeoPoint a{-74.6 + off(rng), 36.3 + off(rng)}, b{-74.6 + off(rng), 36.3 + off(rng)},
        c{-74.6 + off(rng), 36.3 + off(rng)};
    EXPECT_EQ(dist_km(a, a, ref), 0.0);
    EXPECT_DOUBLE_EQ(dist_km(a, b, ref), dist_km(b, a, ref));
    EXPECT_LE(dist_km(a, c, ref), dist_km(a, b, ref) + dist_km(b, c, ref) + 1e-12);
    if (!(a == b)) {
      EXPECT_GT(dist_km(a, b, ref), 0.0);
    }
  }
}

TEST(Bearing, CompassConvention) {
  EXPECT_DOUBLE_EQ(bearing_deg(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(bearing_deg(1.0, 0.0), 90.0);
  EXPECT_DOUBLE_EQ(bearing_deg(0.0, -1.0), 180.0);
  EXPECT_DOUBLE_EQ(bearing_deg(-1.0, 0.0), 270.0);
  EXPECT_DOUBLE_EQ(normalize_axis_deg(270.0), 90.0);
  EXPECT_DOUBLE_EQ(normalize_axis_deg(-10.0), 170.0);
  EXPECT_DOUBLE_EQ(normalize_axis_deg(180.0), 0.0);
}

TEST(Dms, TableValues) {
  EXPECT_EQ(format_dms(36.3344, Axis::lat), "36 N 20'03.840\"");
  EXPECT_EQ(format_dms(-74.7172, Axis::lon), "74 W 43'01.920\"");
  EXPECT_EQ(format_dms(36.0, Axis::lat), "36 N 00'00.000\"");
  EXPECT_EQ(format_dms(-0.5, Axis::lat), "00 S 30'00.000\"");
  EXPECT_EQ(format_dms(123.25, Axis::lon), "123 E 15'00.000\"");
}

TEST(Dms, ParseInverse) {
  EXPECT_NEAR(parse_dms("36 N 20'03.840\""), 36.3344, 1e-12);
  EXPECT_NEAR(parse_dms("74 W 43'01.920\""), -74.7172, 1e-12);
  EXPECT_EQ(parse_dms("00 N 00'00.000\""), 0.0);
}

TEST(Dms, SecondsNeverRoundToSixty) {
  // 59.9996" rounds up into the next minute instead of printing 60.000".
  const double v = 10.0 + 59.0 / 60.0 + 59.9996 / 3600.0;
  EXPECT_EQ(format_dms(v, Axis::lat), "11 N 00'00.000\"");
}

TEST(Dms, RoundTripWithinTolerance) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
  for (int k = 0; k < 10000; ++k) {
    const double a = lat(rng), b = lon(rng);
    ASSERT_NEAR(parse_dms(format_dms(a, Axis::lat), Axis::lat), a, 5e-7);
    ASSERT_NEAR(parse_dms(format_dms(b, Axis::lon), Axis::lon), b, 5e-7);
  }
}

TEST(Dms, MalformedTextReportsColumn) {
  try {
    (void)parse_dms("36 X 20'03.840\"");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 4u);
  }
  try {
    (void)parse_dms("36 N 2'03.840\"");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.column(), 0u);
  }
  EXPECT_THROW((void)parse_dms("36 N 20'03.840"), ParseError);
  EXPECT_THROW((void)parse_dms("36 N 61'00.000\""), ParseError);
  EXPECT_THROW((void)parse_dms("36 E 20'03.840\"", Axis::lat), ParseError);
  EXPECT_THROW((void)parse_dms("91 N 00'00.000\""), ParseError);
}

TEST(Dms, OutOfRangeFormatting) {
  EXPECT_THROW((void)format_dms(90.5, Axis::lat), RangeError);
  EXPECT_THROW((void)format_dms(std::nan(""), Axis::lon), RangeError);
}

TEST(Time, IsoRoundTrip) {
  const auto t = parse_iso8601("2014-08-01T06:30:00Z");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(format_iso8601(*t), "2014-08-01T06:30:00Z");
  EXPECT_DOUBLE_EQ(hours_between(*parse_iso8601("2014-08-01T00:00:00Z"), *t), 6.5);
  EXPECT_EQ(format_iso8601(add_hours(*t, 24.0)), "2014-08-02T06:30:00Z");
  EXPECT_FALSE(parse_iso8601("2014-13-01T00:00:00Z").has_value());
  EXPECT_FALSE(parse_iso8601("yesterday").has_value());
}
