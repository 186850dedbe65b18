#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gravdec/sn_solver.hpp"

using namespace gravdec;

namespace {

SNParams natural(bool include_self = true, double G = 1.0) {
  SNParams p;
  p.constants = PhysicalConstants::unit();
  p.constants.G = G;
  p.include_self = include_self;
  return p;
}

const GroundState& shooting_state() {
  static const GroundState g = [] {
    GroundStateOptions o;
    o.n = 256;
    return ground_state(natural(), GroundStateMethod::radial_shooting, o);
  }();
  return g;
}

}  // namespace

TEST(SNSolver, HartreeSingleBranchHasNoPotential) {
  const auto f = gaussian_field(Geometry::cartesian, 16, 12, 1.0);
  const auto v = effective_potential({f}, natural(false), 0);
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(SNSolver, SelfPotentialAttractiveAtPeak) {
  const auto f = gaussian_field(Geometry::cartesian, 16, 12, 1.0);
  const auto v = effective_potential({f}, natural(true), 0);
  const auto rho = f.probability_density();
  const auto peak = std::max_element(rho.begin(), rho.end()) - rho.begin();
  EXPECT_LT(v[std::size_t(peak)], 0.0);
}

TEST(SNSolver, SelfTermToggleEqualsDirectConvolution) {
  const int n = 8;
  const double L = 8;
  const auto f0 = gaussian_field(Geometry::cartesian, n, L, 1.0, {-0.5, 0, 0});
  const auto f1 = gaussian_field(Geometry::cartesian, n, L, 1.2, {1.0, 0.5, 0});
  SNParams p = natural(true, 0.7);
  p.masses = {1.3, 1.3};
  const std::vector<WaveField> fields{f0, f1};
  const FreeSpacePoisson kernel({n, n, n}, f0.spacing());
  const double h3 = std::pow(f0.spacing(), 3);
  for (std::size_t s = 0; s < 2; ++s) {
    p.include_self = true;
    const auto with = effective_potential(fields, p, s);
    p.include_self = false;
    const auto without = effective_potential(fields, p, s);
    const double m = p.masses[s];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double sum = 0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                sum += std::norm(fields[s].values[f0.index(a, b, c)]) * h3 * kernel.kernel(i - a, j - b, k - c);
          const double oracle = -p.constants.G * m * m * sum;
          const std::size_t q = f0.index(i, j, k);
          EXPECT_NEAR(with[q] - without[q], oracle, 1e-12 * std::abs(oracle));
        }
  }
}

TEST(SNSolver, FreeGaussianSpreadingCartesian) {
  const double s0 = 1.0, t = 2.0;
  auto f = gaussian_field(Geometry::cartesian, 32, 16, s0);
  std::vector<double> norm_change;
  double last = f.norm2();
  const auto out = evolve_split_step(f, natural(true, 0.0), 0.02, 100, [&](std::size_t, const std::vector<WaveField>& x) {
    const double now = x[0].norm2();
    norm_change.push_back(std::abs(now - last));
    last = now;
  });
  const double per_axis = s0 * s0 * (1 + std::pow(t / (2 * s0 * s0), 2));
  EXPECT_NEAR(out.second_moment() / 3, per_axis, 0.005 * per_axis);
  for (double d : norm_change) EXPECT_LT(d, 1e-10);
}

TEST(SNSolver, FreeGaussianSpreadingRadial) {
  const double s0 = 1.0, t = 4.0;
  const auto f = gaussian_field(Geometry::radial, 256, 20, s0);
  const auto out = evolve_split_step(f, natural(true, 0.0), 0.01, 400);
  const double per_axis = s0 * s0 * (1 + std::pow(t / (2 * s0 * s0), 2));
  EXPECT_NEAR(out.second_moment() / 3, per_axis, 0.005 * per_axis);
}

TEST(SNSolver, SelfGravityInhibitsSpreading) {
  const double s0 = 2.0, T = 10.0;
  auto width = [&](double G, int n, double dt) {
    const auto f = gaussian_field(Geometry::radial, n, 40, s0);
    return std::sqrt(evolve_split_step(f, natural(true, G), dt, std::size_t(std::lround(T / dt))).second_moment());
  };
  const double free = width(0.0, 256, 0.05);
  const double bound = width(1.0, 256, 0.05);
  const double refined = width(1.0, 512, 0.025);
  EXPECT_LT(bound, free);
  EXPECT_GT(free - bound, 10 * std::abs(refined - bound));
}

TEST(SNSolver, OversizedStepRejected) {
  const auto f = gaussian_field(Geometry::radial, 64, 10, 0.3);
  EXPECT_THROW(evolve_split_step(f, natural(true, 1.0), 50.0, 1), InvalidInput);
  EXPECT_THROW(evolve_split_step(f, natural(true, 1.0), -1.0, 1), InvalidInput);
}

TEST(SNSolver, TranslationCovariance) {
  const int n = 32, shift = 4;
  const double L = 16;
  // Narrow enough that neither packet touches the periodic edge.
  const auto a = gaussian_field(Geometry::cartesian, n, L, 0.7, {-1.0, 0, 0});
  const auto b = gaussian_field(Geometry::cartesian, n, L, 0.7, {-1.0 + shift * L / n, 0, 0});
  const auto p = natural(true, 1.0);
  const auto ea = evolve_split_step(a, p, 0.05, 20);
  const auto eb = evolve_split_step(b, p, 0.05, 20);
  double worst = 0;
  for (int i = 4; i < n - 4 - shift; ++i)
    for (int j = 4; j < n - 4; ++j)
      for (int k = 4; k < n - 4; ++k)
        worst = std::max(worst, std::abs(ea.values[ea.index(i, j, k)] - eb.values[eb.index(i + shift, j, k)]));
  EXPECT_LT(worst, 1e-8);
}

TEST(SNSolver, GroundStateProfileShapeAndTail) {
  const auto& g = shooting_state();
  const WaveField& f = g.profile;
  const double c = std::sqrt(4 * std::numbers::pi);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double psi = f.values[i].real() / (c * f.radius(i));
    EXPECT_GE(psi, 0.0) << i;
    EXPECT_LE(psi, prev * (1 + 1e-12)) << i;
    prev = psi;
  }
  const std::size_t last = f.size() - 1;
  const double phi = g.potential[last] / 1.0;
  const double tail = -1.0 / f.radius(last);
  EXPECT_NEAR(phi, tail, 0.01 * std::abs(tail));
  EXPECT_NEAR(g.eigenvalue, -0.16277, 1e-4);
}

TEST(SNSolver, GroundStateMethodsAgree) {
  GroundStateOptions o;
  o.n = 256;
  const auto it = ground_state(natural(), GroundStateMethod::imaginary_time, o);
  const auto& sh = shooting_state();
  EXPECT_NEAR(it.eigenvalue / sh.eigenvalue, 1.0, 1e-4);
  std::vector<cplx> diff(it.profile.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = it.profile.values[i] - sh.profile.values[i];
  EXPECT_LT(field_norm(diff, it.profile.weight()), 1e-3);
}

TEST(SNSolver, GroundStateMassScaling) {
  const double lambda = 1.25;
  SNParams heavy = natural();
  heavy.m = lambda;
  GroundStateOptions o;
  o.n = 256;
  const auto a = ground_state(natural(), GroundStateMethod::radial_shooting, o);
  const auto b = ground_state(heavy, GroundStateMethod::radial_shooting, o);
  EXPECT_NEAR(b.eigenvalue / a.eigenvalue, std::pow(lambda, 5), 1e-3 * std::pow(lambda, 5));
}

TEST(SNSolver, GroundStateNeedsAttraction) {
  EXPECT_THROW(ground_state(natural(true, 0.0), GroundStateMethod::radial_shooting), InvalidInput);
}

TEST(SNSolver, ZeroSeparationConstantsAreIdentity) {
  auto f = gaussian_field(Geometry::radial, 64, 10, 1.0);
  f.t = 2.5;
  const std::vector<double> cs{0.0, 0.0};
  const auto out = gauge_rephase({f, f}, cs);
  EXPECT_EQ(out[0].values, f.values);
  EXPECT_EQ(out[1].values, f.values);
}

TEST(SNSolver, OppositeSeparationConstantsKeepProduct) {
  auto a = gaussian_field(Geometry::cartesian, 8, 8, 1.0, {0.5, 0, 0});
  auto b = gaussian_field(Geometry::cartesian, 8, 8, 1.5);
  a.t = b.t = 3.7;
  const std::vector<double> cs{0.8, -0.8};
  const auto out = gauge_rephase({a, b}, cs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx before = a.values[i] * b.values[i];
    EXPECT_NEAR(std::abs(out[0].values[i] * out[1].values[i] - before), 0.0, 1e-15 * std::abs(before) + 1e-300);
  }
  const std::vector<double> bad{0.8, 0.8};
  EXPECT_THROW(gauge_rephase({a, b}, bad), InvalidInput);
}

TEST(SNSolver, RephasedStationaryBranchesSolveTheCoupledEquations) {
  const auto g = refine_stationary_state(shooting_state(), natural());
  const double mu = g.eigenvalue, c = 0.3, t = 1.7, dt = 1e-4;
  // Two Hartree branches carrying the same stationary profile each feel the
  // other's potential, which equals the single-field self-potential. Branch s
  // evolves as exp(-i (mu - c_s) t) u, i.e. it solves the coupled equations
  // with separation constant -c_s.
  const SNParams p = natural(false);
  const std::vector<double> cs{c, -c};
  auto raw = [&](double time) {
    std::vector<WaveField> fs{g.profile, g.profile};
    for (int s = 0; s < 2; ++s) {
      fs[s].t = time;
      for (auto& v : fs[s].values) v *= std::polar(1.0, -(mu - cs[s]) * time);
    }
    return fs;
  };
  auto rephased = [&](double time) { return gauge_rephase(raw(time), cs); };
  auto residual = [&](auto&& fields_at, std::size_t s) {
    const auto now = fields_at(t), fwd = fields_at(t + dt), bwd = fields_at(t - dt);
    std::vector<cplx> dpsi(now[s].size());
    for (std::size_t i = 0; i < dpsi.size(); ++i) dpsi[i] = (fwd[s].values[i] - bwd[s].values[i]) / (2 * dt);
    return field_norm(sn_residual(now, p, s, dpsi), now[s].weight());
  };
  EXPECT_NEAR(residual(raw, 0), c, 1e-3 * c);
  EXPECT_LT(residual(rephased, 0), 1e-8);
  EXPECT_LT(residual(rephased, 1), 1e-8);
}

TEST(SNSolver, NaturalUnitsScale) {
  SNParams p;
  p.constants = {2.0, 3.0, 1.0};
  p.m = 0.5;
  EXPECT_DOUBLE_EQ(p.length_unit(), 9.0 / (2.0 * 0.125));
  EXPECT_DOUBLE_EQ(p.time_unit(), p.constants.hbar / p.energy_unit());
}
