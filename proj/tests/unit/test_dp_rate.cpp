#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "gravdec/dp_rate.hpp"

using namespace gravdec;

namespace {

const PhysicalConstants kUnit = PhysicalConstants::unit();

// ∬ rho rho' / |r - r'| for a uniform sphere by radial shell integration:
// 2 ∫ (M(r)/r) dM(r), Simpson's rule.
double sphere_self_coulomb(double mass, double radius) {
  const double rho = mass / (4.0 / 3.0 * std::numbers::pi * radius * radius * radius);
  auto f = [&](double r) {
    const double enclosed = 4.0 / 3.0 * std::numbers::pi * r * r * r * rho;
    return r > 0 ? 2 * enclosed / r * 4 * std::numbers::pi * r * r * rho : 0.0;
  };
  const int n = 2000;
  const double h = radius / n;
  double s = f(0) + f(radius);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(i * h);
  return s * h / 3;
}

}  // namespace

TEST(DpRate, IdenticalPairGivesZeroAndInfiniteTau) {
  const auto pair = build_displaced_cube(1, 1, 0, Axis::z);
  for (const FullMethod m : {FullMethod{VoxelOptions{8}}, FullMethod{MonteCarloOptions{2000, 3}}}) {
    const auto r = delta_full(pair, m, kUnit);
    EXPECT_EQ(r.delta, 0.0);
    EXPECT_EQ(r.tau_d, std::numeric_limits<double>::infinity());
  }
}

TEST(DpRate, QuadraticFormulaMirrorValues) {
  const auto p = mirror_preset();
  const PhysicalConstants k;
  const auto r = delta_cube_quadratic(p.side, p.density(), p.d, k);
  EXPECT_NEAR(r.delta_hbar_c_per_cm, 2.2e-20, 0.03 * 2.2e-20);
  EXPECT_NEAR(r.tau_d, 1.5e9, 0.03 * 1.5e9);
  EXPECT_FALSE(r.warning.has_value());
  EXPECT_EQ(delta_cube_quadratic(p.side, p.density(), 0, k).delta, 0.0);
}

TEST(DpRate, QuadraticScalesWithDisplacementSquared) {
  const double d1 = delta_cube_quadratic(1, 1, 0.01, kUnit).delta;
  const double d2 = delta_cube_quadratic(1, 1, 0.02, kUnit).delta;
  EXPECT_NEAR(d2 / d1, 4.0, 1e-12);
}

TEST(DpRate, QuadraticWarnsOutsideSmallDisplacement) {
  const auto r = delta_cube_quadratic(1, 1, 0.2, kUnit);
  ASSERT_TRUE(r.warning.has_value());
  EXPECT_GT(r.delta, 0);
}

TEST(DpRate, TauConventions) {
  const PhysicalConstants k;
  const double delta = 7.0e-44;
  EXPECT_NEAR(tau_from_delta(delta, Convention::penrose, k), 1.5e9, 0.03 * 1.5e9);
  for (double d : {1e-50, 3.3e-44, 1.0}) {
    EXPECT_EQ(tau_from_delta(d, Convention::diosi, k), 2 * tau_from_delta(d, Convention::penrose, k));
  }
  EXPECT_EQ(tau_from_delta(0, Convention::penrose, k), std::numeric_limits<double>::infinity());
  EXPECT_THROW(tau_from_delta(-1, Convention::penrose, k), InvalidInput);
}

TEST(DpRate, SurfaceExpansionAgreesWithQuadratic) {
  const auto p = mirror_preset();
  const PhysicalConstants k;
  const auto s = delta_surface_expansion(p.pair(), k);
  const auto q = delta_cube_quadratic(p.side, p.density(), p.d, k);
  EXPECT_NEAR(s.delta / q.delta, 1.0, 1e-3);
  const auto unit = delta_surface_expansion(build_displaced_cube(1, 1, 0.01, Axis::x), kUnit);
  EXPECT_NEAR(unit.delta / (0.01 * 0.01), 4 * std::numbers::pi / 3, 1e-6);
  EXPECT_EQ(delta_surface_expansion(build_displaced_cube(1, 1, 0, Axis::y), kUnit).delta, 0.0);
}

TEST(DpRate, SurfaceExpansionRejectsNonCubes) {
  const SuperposedPair spheres(MassDistribution::sphere(1, 1), MassDistribution::sphere(1, 1, {0.1, 0, 0}));
  EXPECT_THROW(delta_surface_expansion(spheres, kUnit), InvalidInput);
}

TEST(DpRate, VoxelMirrorWithinTwoPercentOfQuadratic) {
  const auto p = mirror_preset();
  const PhysicalConstants k;
  const auto v = delta_voxel(p.pair(), VoxelOptions{64}, k);
  const auto q = delta_cube_quadratic(p.side, p.density(), p.d, k);
  EXPECT_NEAR(v.delta / q.delta, 1.0, 0.02);
  EXPECT_NEAR(v.delta, 7.0e-44, 0.03 * 7.0e-44);
}

TEST(DpRate, VoxelIsSymmetricPositiveAndTranslationInvariant) {
  const auto pair = build_displaced_cube(1, 1, 0.01, Axis::z);
  const double d0 = delta_voxel(pair, VoxelOptions{16}, kUnit).delta;
  EXPECT_GT(d0, 0);
  EXPECT_EQ(delta_voxel(pair.swapped(), VoxelOptions{16}, kUnit).delta, d0);
  const double dt = delta_voxel(pair.translated({0.37, -1.25, 2.5}), VoxelOptions{16}, kUnit).delta;
  EXPECT_NEAR(dt / d0, 1.0, 1e-12);
}

TEST(DpRate, VoxelRefinementConvergesTowardQuadratic) {
  const auto pair = build_displaced_cube(1, 1, 0.01, Axis::z);
  const double exact = delta_cube_quadratic(1, 1, 0.01, kUnit).delta;
  const double coarse = delta_voxel(pair, VoxelOptions{16}, kUnit).delta;
  const double fine = delta_voxel(pair, VoxelOptions{32}, kUnit).delta;
  EXPECT_LT(std::abs(fine - coarse), std::abs(coarse - exact));
  EXPECT_LT(std::abs(fine - exact), std::abs(coarse - exact));
}

TEST(DpRate, VoxelSmallDisplacementExponentIsTwo) {
  const double d1 = 1e-3, d2 = 1e-2;
  const double a = delta_voxel(build_displaced_cube(1, 1, d1, Axis::z), VoxelOptions{16}, kUnit).delta;
  const double b = delta_voxel(build_displaced_cube(1, 1, d2, Axis::z), VoxelOptions{16}, kUnit).delta;
  EXPECT_NEAR(std::log(b / a) / std::log(d2 / d1), 2.0, 0.05);
}

TEST(DpRate, SeparatedSpheresMatchShellOracle) {
  const double R = 1, D = 4, rho = 1;
  const double m = 4.0 / 3.0 * std::numbers::pi * R * R * R * rho;
  const SuperposedPair pair(MassDistribution::sphere(R, rho), MassDistribution::sphere(R, rho, {D, 0, 0}));
  const double oracle = 2 * sphere_self_coulomb(m, R) - 2 * m * m / D;
  EXPECT_NEAR(sphere_self_coulomb(m, R), 1.2 * m * m / R, 1e-6 * m * m / R);
  const double voxel = delta_voxel(pair, VoxelOptions{16}, kUnit).delta;
  EXPECT_NEAR(voxel / oracle, 1.0, 0.02);
  const auto mc = delta_mc(pair, MonteCarloOptions{200000, 11}, kUnit);
  EXPECT_NEAR(mc.delta, oracle, std::max(4 * mc.standard_error, 0.01 * oracle));
}

TEST(DpRate, MonteCarloIsDeterministicAndSymmetricWithinError) {
  const auto pair = build_displaced_cube(1, 1, 0.1, Axis::z);
  const auto a = delta_mc(pair, MonteCarloOptions{20000, 5}, kUnit);
  const auto b = delta_mc(pair, MonteCarloOptions{20000, 5}, kUnit);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_GT(a.standard_error, 0);
  EXPECT_GE(a.delta, -3 * a.standard_error);
  const auto s = delta_mc(pair.swapped(), MonteCarloOptions{20000, 6}, kUnit);
  EXPECT_NEAR(a.delta, s.delta, 3 * std::hypot(a.standard_error, s.standard_error));
  EXPECT_THROW(delta_mc(pair, MonteCarloOptions{999, 1}, kUnit), InvalidInput);
}

TEST(DpRate, DiosiConventionDoublesTau) {
  const auto pair = build_displaced_cube(1, 1, 0.05, Axis::z);
  const auto p = delta_voxel(pair, VoxelOptions{8}, kUnit, Convention::penrose);
  const auto d = delta_voxel(pair, VoxelOptions{8}, kUnit, Convention::diosi);
  EXPECT_EQ(p.delta, d.delta);
  EXPECT_EQ(d.tau_d, 2 * p.tau_d);
}
