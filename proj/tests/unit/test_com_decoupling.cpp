#include <gtest/gtest.h>

#include <cmath>

#include "gravdec/com_decoupling.hpp"

using namespace gravdec;

namespace {

double variance(const Marginal& m) {
  double s = 0, sx = 0, sxx = 0;
  for (std::size_t i = 0; i < m.x.size(); ++i) {
    s += m.density[i];
    sx += m.density[i] * m.x[i];
    sxx += m.density[i] * m.x[i] * m.x[i];
  }
  const double mean = sx / s;
  return sxx / s - mean * mean;
}

std::vector<double> local_maxima(const Marginal& m, double floor) {
  std::vector<double> xs;
  for (std::size_t i = 1; i + 1 < m.x.size(); ++i)
    if (m.density[i] > floor && m.density[i] >= m.density[i - 1] && m.density[i] > m.density[i + 1]) xs.push_back(m.x[i]);
  return xs;
}

}  // namespace

TEST(ComDecoupling, MarginalsIntegrateToOne) {
  const auto f = make_product_field(64, 16, 1.0, 2.0, [](double x) { return gaussian_packet(x, -1, 0.8, 1.0); },
                                    [](double x) { return gaussian_packet(x, 2, 1.1, -0.5); });
  EXPECT_NEAR(particle_marginal(f, 0).integral(), 1.0, 1e-8);
  EXPECT_NEAR(particle_marginal(f, 1).integral(), 1.0, 1e-8);
  EXPECT_NEAR(com_marginal(f).integral(), 1.0, 1e-8);
  EXPECT_NEAR(relative_marginal(f).integral(), 1.0, 1e-8);
  const auto g = make_product_field(64, 16, 1.0, 1.0, [](double x) { return gaussian_packet(x, 0.3, 1.0, 0); },
                                    [](double x) { return gaussian_packet(x, -0.7, 1.0, 2.0); });
  EXPECT_NEAR(com_marginal(g).integral(), 1.0, 1e-8);
}

TEST(ComDecoupling, IdenticalGaussiansGiveHalfVarianceCom) {
  const double s = 1.2;
  const auto f = make_product_field(128, 24, 1.0, 1.0, [&](double x) { return gaussian_packet(x, 0, s, 0); },
                                    [&](double x) { return gaussian_packet(x, 0, s, 0); });
  EXPECT_NEAR(variance(com_marginal(f)), s * s / 2, 1e-3 * s * s);
  EXPECT_NEAR(variance(relative_marginal(f)), 2 * s * s, 1e-3 * s * s);
}

TEST(ComDecoupling, UnequalMassCom) {
  const double s = 1.0, m1 = 1.0, m2 = 3.0;
  const auto f = make_product_field(128, 24, m1, m2, [&](double x) { return gaussian_packet(x, 0, s, 0); },
                                    [&](double x) { return gaussian_packet(x, 0, s, 0); });
  const double w1 = m1 / (m1 + m2), w2 = m2 / (m1 + m2);
  const double expect = (w1 * w1 + w2 * w2) * s * s;
  EXPECT_NEAR(variance(com_marginal(f)), expect, 0.01 * expect);
}

TEST(ComDecoupling, TwoPacketMarginalIsBimodal) {
  TwoPacketSpec spec;
  spec.separation = 3;
  const auto f = make_two_packet_field(128, 32, 1.0, 1.0, spec);
  const auto m = com_marginal(f);
  const double top = *std::max_element(m.density.begin(), m.density.end());
  const auto peaks = local_maxima(m, 0.5 * top);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(peaks[1] - peaks[0], 2 * spec.separation, m.spacing);
}

TEST(ComDecoupling, FreeOverlapVisibility) {
  TwoPacketSpec spec;
  const double M = 2.0;
  const std::size_t steps = 256;
  const double dt = spec.separation * M / spec.momentum / double(steps);
  auto f = make_two_packet_field(256, 32, 1.0, 1.0, spec);
  const std::vector<double> zero(f.values.size(), 0.0);
  const auto out = evolve_two_particle(f, zero, dt, steps);
  EXPECT_NEAR(visibility(com_marginal(out)), 1.0, 0.02);

  spec.amplitude_right = 0;
  auto single = make_two_packet_field(256, 32, 1.0, 1.0, spec);
  const auto one = evolve_two_particle(single, zero, dt, steps);
  EXPECT_EQ(visibility(com_marginal(one)), 0.0);
}

TEST(ComDecoupling, FlatMarginalHasNoVisibility) {
  Marginal m{{0, 1, 2, 3}, {1, 1, 1, 1}, 1};
  EXPECT_THROW(visibility(m), InvalidInput);
}

TEST(ComDecoupling, FreeParticlesSpreadLikeClosedForm) {
  const double s0 = 1.0, t = 2.0;
  auto f = make_product_field(256, 40, 1.0, 1.0, [&](double x) { return gaussian_packet(x, -3, s0, 0); },
                              [&](double x) { return gaussian_packet(x, 3, s0, 0); });
  const auto out = evolve_two_particle(f, 0.0, 0.1, 0.01, std::size_t(t / 0.01));
  const double expect = s0 * s0 * (1 + std::pow(t / (2 * s0 * s0), 2));
  EXPECT_NEAR(variance(particle_marginal(out, 0)), expect, 0.005 * expect);
  EXPECT_NEAR(variance(particle_marginal(out, 1)), expect, 0.005 * expect);
}

TEST(ComDecoupling, FreeComFollowsAnalyticPropagation) {
  // Phi(R) Gaussian of width sC with mass M: |Phi(R,t)|^2 has variance
  // sC^2 (1 + (t / (2 M sC^2))^2) whatever the relative state does.
  const double sC = 0.6, M = 2.0, t = 1.5;
  auto f = make_com_relative_field(256, 32, 1.0, 1.0, [&](double R) { return gaussian_packet(R, 0, sC, 0); },
                                   [](double r) { return gaussian_packet(r, 0, 1.0, 0); });
  const auto out = evolve_two_particle(f, 1.0, 4 * 32.0 / 256, 0.005, std::size_t(t / 0.005));
  const double expect = sC * sC * (1 + std::pow(t / (2 * M * sC * sC), 2));
  EXPECT_NEAR(variance(com_marginal(out)), expect, 0.005 * expect);
}

TEST(ComDecoupling, ExternalPotentialBreaksDecoupling) {
  TwoPacketSpec spec;
  auto f = make_two_packet_field(128, 32, 1.0, 1.0, spec);
  const std::vector<double> zero(f.values.size(), 0.0);
  const auto free = evolve_two_particle(f, zero, 0.01, 60);
  const auto v = external_potential_on_first(f, [](double x) { return 0.5 * x * x / 16; });
  const auto pushed = evolve_two_particle(f, v, 0.01, 60);
  EXPECT_GT(l1_distance(com_marginal(free), com_marginal(pushed)), 1e-3);
}

TEST(ComDecoupling, RelativeInteractionConservesMomentum) {
  auto f = make_product_field(128, 32, 1.0, 1.0, [](double x) { return gaussian_packet(x, -2, 1.0, 1.5); },
                              [](double x) { return gaussian_packet(x, 2, 1.0, -0.5); });
  const double p0 = total_momentum(f);
  EXPECT_NEAR(p0, 1.0, 1e-6);
  const auto out = evolve_two_particle(f, 1.0, 4 * 32.0 / 128, 0.01, 200);
  EXPECT_NEAR(total_momentum(out), p0, 1e-8 * std::abs(p0));
  EXPECT_NEAR(out.norm2(), 1.0, 1e-10);
}

TEST(ComDecoupling, RejectsBadInputs) {
  auto f = make_two_packet_field(64, 16, 1.0, 1.0, TwoPacketSpec{});
  EXPECT_THROW(softened_gravity(f, 1.0, 0.0), InvalidInput);
  EXPECT_THROW(evolve_two_particle(f, 1.0, 0.5, 1e3, 1), InvalidInput);
  TwoPacketSpec none;
  none.amplitude_left = none.amplitude_right = 0;
  EXPECT_THROW(make_two_packet_field(64, 16, 1.0, 1.0, none), InvalidInput);
}
