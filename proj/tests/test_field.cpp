#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "gliderkit/field.hpp"

using namespace gliderkit;

namespace {

ScalarGrid random_grid(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
  std::vector<double> lons, lats;
  for (std::size_t i = 0; i < nx; ++i) lons.push_back(-75.0 + 0.1 * static_cast<double>(i));
  for (std::size_t j = 0; j < ny; ++j) lats.push_back(36.0 + 0.1 * static_cast<double>(j));
  ScalarGrid g(lons, lats);
  std::normal_distribution<double> n(5.0, 3.0);
  for (auto& v : g.values) v = n(rng);
  return g;
}

}  // namespace

TEST(Normalize, AttainsZeroAndOne) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    ScalarGrid g = random_grid(rng, 3 + trial % 11, 4 + trial % 7);
    if (trial % 3 == 0) g.set_masked(1, 1);
    const ScalarGrid n = normalize(g);
    double lo = 2.0, hi = -1.0;
    for (std::size_t k = 0; k < n.size(); ++k) {
      if (n.mask[k]) continue;
      ASSERT_GE(n.values[k], 0.0);
      ASSERT_LE(n.values[k], 1.0);
      lo = std::min(lo, n.values[k]);
      hi = std::max(hi, n.values[k]);
    }
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
  }
}

TEST(Normalize, HandComputedValues) {
  ScalarGrid g({0.0, 1.0, 2.0}, {0.0}, 0.0);
  g.values = {2.0, 4.0, 10.0};
  const ScalarGrid n = normalize(g);
  EXPECT_DOUBLE_EQ(n.values[0], 0.0);
  EXPECT_DOUBLE_EQ(n.values[1], 0.25);
  EXPECT_DOUBLE_EQ(n.values[2], 1.0);
}

TEST(Normalize, ConstantFieldMapsToZero) {
  ScalarGrid g({0.0, 1.0}, {0.0, 1.0}, 3.0);
  for (double v : normalize(g).values) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, AllMaskedIsRangeError) {
  ScalarGrid g({0.0, 1.0}, {0.0, 1.0}, 3.0);
  for (auto& m : g.mask) m = 1;
  EXPECT_THROW((void)normalize(g), RangeError);
}

TEST(Normalize, RegionSetsSpanAndMasksOutside) {
  ScalarGrid g({0.0, 1.0, 2.0, 3.0}, {0.0}, 0.0);
  g.values = {100.0, 1.0, 3.0, -50.0};
  const ScalarGrid n = normalize(g, BoundingBox{0.5, 2.5, -1.0, 1.0});
  EXPECT_TRUE(n.masked(0, 0));
  EXPECT_TRUE(n.masked(0, 3));
  EXPECT_DOUBLE_EQ(n.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(n.at(0, 2), 1.0);
}

TEST(LocalRegion, MarginIsTenPercentOfDiagonal) {
  ScalarGrid g({-76.0, -75.99}, {35.0, 35.01});  // fine spacing so the diagonal term wins
  const std::vector<GeoPoint> path{{-75.0, 36.0}, {-74.7, 36.4}};
  const BoundingBox b = local_region(path, g);
  EXPECT_NEAR(b.lon_min, -75.0 - 0.05, 1e-12);
  EXPECT_NEAR(b.lon_max, -74.7 + 0.05, 1e-12);
  EXPECT_NEAR(b.lat_min, 36.0 - 0.05, 1e-12);
  EXPECT_NEAR(b.lat_max, 36.4 + 0.05, 1e-12);
}

TEST(LocalRegion, StationaryPathGetsOneSpacing) {
  ScalarGrid g({-75.0, -74.9, -74.8}, {36.0, 36.1, 36.2});
  const std::vector<GeoPoint> path{{-74.9, 36.1}};
  const BoundingBox b = local_region(path, g);
  EXPECT_NEAR(b.lon_max - b.lon_min, 0.2, 1e-12);
  EXPECT_THROW((void)local_region(std::span<const GeoPoint>{}, g), RangeError);
}

TEST(Crop, MasksExactlyTheOuterRings) {
  std::mt19937_64 rng(32);
  for (std::size_t rings = 0; rings <= 3; ++rings) {
    const ScalarGrid g = random_grid(rng, 12, 9);
    const ScalarGrid c = crop_boundary(g, rings);
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const std::size_t ring = std::min({i, j, g.nx() - 1 - i, g.ny() - 1 - j});
        EXPECT_EQ(c.masked(j, i), ring < rings) << "node " << j << "," << i << " rings " << rings;
        EXPECT_EQ(c.at(j, i), g.at(j, i));
      }
    }
  }
}

TEST(Crop, TooSmallGridRejected) {
  ScalarGrid g({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 2.0, 3.0});
  EXPECT_THROW((void)crop_boundary(g, 2), RangeError);
  EXPECT_NO_THROW((void)crop_boundary(g, 1));
}

TEST(Smooth, LevelMapping) {
  EXPECT_EQ(smooth_scheme_from_level(0), SmoothScheme::none);
  EXPECT_EQ(smooth_scheme_from_level(1), SmoothScheme::kaiser);
  EXPECT_EQ(smooth_scheme_from_level(2), SmoothScheme::bilinear);
  EXPECT_EQ(smooth_scheme_from_level(3), SmoothScheme::gaussian);
  EXPECT_EQ(smooth_scheme_from_level(4), SmoothScheme::bicubic);
  EXPECT_THROW((void)smooth_scheme_from_level(5), ConfigError);
}

TEST(Smooth, InterpolatingSchemesKeepSourceNodes) {
  std::mt19937_64 rng(33);
  const ScalarGrid g = random_grid(rng, 7, 6);
  for (SmoothScheme s : {SmoothScheme::none, SmoothScheme::bilinear, SmoothScheme::bicubic}) {
    const ScalarGrid f = smooth(g, s, 4);
    ASSERT_EQ(f.nx(), 25u);
    ASSERT_EQ(f.ny(), 21u);
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(f.at(4 * j, 4 * i), g.at(j, i), 1e-12);
    }
  }
}

TEST(Smooth, BilinearMidpointIsAverage) {
  ScalarGrid g({0.0, 1.0}, {0.0, 1.0});
  g.values = {0.0, 1.0, 2.0, 3.0};
  const ScalarGrid f = smooth(g, SmoothScheme::bilinear, 2);
  EXPECT_DOUBLE_EQ(f.at(1, 1), 1.5);
  EXPECT_DOUBLE_EQ(f.at(0, 1), 0.5);
}

TEST(Smooth, LowPassSchemesStayWithinRange) {
  std::mt19937_64 rng(34);
  const ScalarGrid g = random_grid(rng, 8, 8);
  const auto [lo, hi] = *value_range(g);
  for (SmoothScheme s : {SmoothScheme::kaiser, SmoothScheme::gaussian}) {
    const ScalarGrid f = smooth(g, s, 4);
    for (double v : f.values) {
      EXPECT_GE(v, lo - 1e-9);
      EXPECT_LE(v, hi + 1e-9);
    }
  }
}

TEST(Smooth, MaskFollowsNearestSourceNode) {
  ScalarGrid g({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, 1.0);
  g.set_masked(0, 0);
  const ScalarGrid f = smooth(g, SmoothScheme::bilinear, 4);
  EXPECT_TRUE(f.masked(0, 0));
  EXPECT_TRUE(f.masked(1, 1));
  EXPECT_FALSE(f.masked(2, 2));
  EXPECT_FALSE(f.masked(8, 8));
}

TEST(Sample, BilinearMatchesHandValue) {
  ScalarGrid g({0.0, 1.0}, {0.0, 1.0});
  g.values = {0.0, 1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(sample_bilinear(g, {0.25, 0.5}), 0.25 + 1.0);
  EXPECT_DOUBLE_EQ(sample_bilinear(g, {1.0, 1.0}), 3.0);
  EXPECT_THROW((void)sample_bilinear(g, {1.5, 0.5}), RangeError);
  g.set_masked(1, 1);
  EXPECT_FALSE(try_sample_bilinear(g, {0.5, 0.5}).has_value());
  EXPECT_TRUE(try_sample_bilinear(g, {0.5, 0.0}).has_value());
}

TEST(Vectors, ThinningKeepsIndexMultiples) {
  std::mt19937_64 rng(35);
  VectorFrame f{random_grid(rng, 9, 9), random_grid(rng, 9, 9)};
  VectorFrame t = thin_vectors(f, 3);
  ASSERT_EQ(t.u.nx(), 3u);
  ASSERT_EQ(t.u.ny(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(std::memcmp(&t.u.at(j, i), &f.u.at(3 * j, 3 * i), sizeof(double)), 0);
      EXPECT_EQ(std::memcmp(&t.v.at(j, i), &f.v.at(3 * j, 3 * i), sizeof(double)), 0);
    }
  }
  EXPECT_EQ(t.u.lons, (std::vector<double>{f.u.lons[0], f.u.lons[3], f.u.lons[6]}));
  EXPECT_EQ(thin_vectors(f, 1).u.values, f.u.values);
  EXPECT_THROW((void)thin_vectors(f, 0), RangeError);
}

TEST(Vectors, MaskingThresholdIsInclusive) {
  ScalarGrid u({0.0, 1.0, 2.0}, {0.0}), v({0.0, 1.0, 2.0}, {0.0});
  u.values = {0.5, 0.1, 0.0};
  v.values = {0.0, 0.0, 0.0};
  const VectorFrame m = mask_vectors({u, v}, 0.5);
  EXPECT_FALSE(m.masked(0, 0));  // magnitude exactly 0.5
  EXPECT_TRUE(m.masked(0, 1));
  EXPECT_TRUE(m.masked(0, 2));
  EXPECT_THROW((void)mask_vectors({u, v}, -1.0), RangeError);
}

TEST(Series, FrameIndexClampsToLastFrame) {
  FieldSeries s;
  s.delta_hours = 3.0;
  s.frames.assign(4, ScalarGrid({0.0, 1.0}, {0.0, 1.0}));
  EXPECT_EQ(s.frame_index_at(-1.0), 0u);
  EXPECT_EQ(s.frame_index_at(2.999), 0u);
  EXPECT_EQ(s.frame_index_at(3.0), 1u);
  EXPECT_EQ(s.frame_index_at(9.0), 3u);
  EXPECT_EQ(s.frame_index_at(48.0), 3u);
}
