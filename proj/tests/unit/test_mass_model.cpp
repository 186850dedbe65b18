#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "gravdec/mass_model.hpp"

using namespace gravdec;

TEST(MassModel, MirrorCubeMass) {
  const auto pair = build_displaced_cube(1e-5, 5e3, 1e-13, Axis::z);
  EXPECT_NEAR(pair.a.total_mass(), 5e-12, 5e-12 * 1e-12);
  EXPECT_NEAR(pair.b.total_mass(), 5e-12, 5e-12 * 1e-12);
}

TEST(MassModel, ZeroDisplacementGivesIdenticalMembers) {
  const auto pair = build_displaced_cube(1, 1, 0, Axis::z);
  EXPECT_EQ(pair.a.origin, pair.b.origin);
  const auto v = voxelize_pair(pair, 4);
  EXPECT_EQ(v.a.density, v.b.density);
}

TEST(MassModel, HalfShiftedUnitCubesOverlapByHalf) {
  const auto pair = build_displaced_cube(1, 1, 0.5, Axis::x);
  const Aabb A = pair.a.bounds(), B = pair.b.bounds();
  double overlap = 1;
  for (int ax = 0; ax < 3; ++ax) overlap *= interval_overlap(A.lo[ax], A.hi[ax], B.lo[ax], B.hi[ax]);
  EXPECT_DOUBLE_EQ(overlap, 0.5);
}

TEST(MassModel, RejectsNonPositiveInputs) {
  EXPECT_THROW(build_displaced_cube(0, 1, 0, Axis::z), InvalidInput);
  EXPECT_THROW(build_displaced_cube(1, -1, 0, Axis::z), InvalidInput);
  EXPECT_THROW(MassDistribution::sphere(-1, 1), InvalidInput);
}

TEST(MassModel, UnitCubeTilesExactly) {
  const auto v = voxelize(MassDistribution::box({1, 1, 1}, 1), 4);
  const auto& g = std::get<VoxelGrid>(v.shape);
  ASSERT_EQ(g.dims, (std::array<std::size_t, 3>{4, 4, 4}));
  for (double d : g.density) EXPECT_DOUBLE_EQ(d, 1.0);
  EXPECT_NEAR(v.total_mass(), 1.0, 1e-12);
}

TEST(MassModel, SphereVoxelizationConservesVolume) {
  const auto v = voxelize(MassDistribution::sphere(1, 1), 32);
  EXPECT_NEAR(v.total_mass(), 4 * std::numbers::pi / 3, 1e-3 * 4 * std::numbers::pi / 3);
}

TEST(MassModel, SubCellDisplacementMatchesIntervalFractions) {
  // Cube of side 1 shifted by a quarter cell on an 8-cell grid anchored at 0.
  const double a = 1.0 / 8, shift = 0.25 * a;
  const auto cube = MassDistribution::box({1, 1, 1}, 1, {shift, 0, 0});
  GridSpec g{{0, 0, 0}, a, {9, 8, 8}};
  const VoxelGrid vg = rasterize(cube, g);
  double total = 0;
  for (double d : vg.density) total += d * a * a * a;
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Closed-form coverage of cell i along x: |[i a, (i+1) a) ∩ [shift, 1 + shift)| / a.
  for (std::size_t i = 0; i < 9; ++i) {
    const double lo = double(i) * a;
    const double expect = (std::min(lo + a, 1 + shift) - std::max(lo, shift)) / a;
    EXPECT_NEAR(vg.at(i, 3, 5), std::max(0.0, expect), 1e-12) << i;
  }
  EXPECT_NEAR(vg.at(0, 0, 0), 0.75, 1e-12);
  EXPECT_NEAR(vg.at(8, 0, 0), 0.25, 1e-12);
}

TEST(MassModel, TranslationMovesOriginOnly) {
  const auto s = MassDistribution::sphere(2, 3, {1, 1, 1});
  const auto t = s.translated({0.5, -1, 2});
  EXPECT_EQ(t.origin, (Vec3{1.5, 0, 3}));
  EXPECT_EQ(t.density0, s.density0);
  EXPECT_DOUBLE_EQ(t.total_mass(), s.total_mass());
}

TEST(MassModel, PairRequiresEqualMass) {
  EXPECT_THROW(SuperposedPair(MassDistribution::box({1, 1, 1}, 1), MassDistribution::box({1, 1, 1}, 2)),
               InvalidInput);
}

TEST(MassModel, VoxelFileRoundTrip) {
  const auto v = voxelize(MassDistribution::sphere(1, 2.5, {0.1, 0.2, 0.3}), 6);
  const auto base = (std::filesystem::temp_directory_path() / "gravdec_voxel_roundtrip").string();
  write_voxel_grid(base, std::get<VoxelGrid>(v.shape), v.origin);
  const auto back = read_voxel_grid(base);
  EXPECT_EQ(back.origin, v.origin);
  EXPECT_EQ(std::get<VoxelGrid>(back.shape).density, std::get<VoxelGrid>(v.shape).density);
  EXPECT_DOUBLE_EQ(back.total_mass(), v.total_mass());
}
