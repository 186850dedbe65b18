#include <gtest/gtest.h>

#include <cmath>

#include "gravdec/decoherence.hpp"

using namespace gravdec;

namespace {
const Amplitudes kPlus{cplx(1 / std::sqrt(2.0)), cplx(1 / std::sqrt(2.0))};
}

TEST(Decoherence, MasterEquationClosedForm) {
  const auto s0 = TwoBranchState::pure(kPlus);
  const auto s1 = evolve_master(s0, 1.0, 1.0);
  EXPECT_NEAR(s1.rho[0][1].real(), std::exp(-1.0) / 2, 1e-15);
  EXPECT_NEAR(s1.rho[0][1].real(), 0.18394, 1e-5);
  EXPECT_DOUBLE_EQ(s1.rho[0][0].real(), 0.5);
  EXPECT_DOUBLE_EQ(s1.rho[1][1].real(), 0.5);
  EXPECT_NEAR(s1.trace(), 1.0, 1e-15);
  EXPECT_EQ(s1.rho[1][0], std::conj(s1.rho[0][1]));
  const auto same = evolve_master(s0, 1.0, 0.0);
  EXPECT_EQ(same.rho, s0.rho);
  EXPECT_THROW(evolve_master(s1, 1.0, 0.5), InvalidInput);
}

TEST(Decoherence, TrajectoryPreservesNormAndPopulations) {
  const Amplitudes psi{cplx(std::sqrt(0.3)), cplx(0, std::sqrt(0.7))};
  const auto tr = sample_trajectory({1.0, 0.01, 42}, psi, 2.0);
  ASSERT_EQ(tr.t.size(), 201u);
  for (const auto& a : tr.psi) {
    EXPECT_NEAR(std::norm(a[0]) + std::norm(a[1]), 1.0, 1e-12);
    EXPECT_NEAR(std::norm(a[0]), 0.3, 1e-12);
  }
}

TEST(Decoherence, RejectsCoarseSteps) {
  EXPECT_THROW(sample_trajectory({1.0, 0.02, 1}, kPlus, 1.0), InvalidInput);
  EXPECT_THROW(sample_trajectory({1.0, 0.01, 1}, {cplx(1), cplx(1)}, 1.0), InvalidInput);
}

TEST(Decoherence, SameSeedIsBitIdentical) {
  const auto a = sample_ensemble({1.0, 0.01, 9}, kPlus, 1.0, 20);
  const auto b = sample_ensemble({1.0, 0.01, 9}, kPlus, 1.0, 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].phase, b[i].phase);
    EXPECT_EQ(a[i].psi, b[i].psi);
  }
  const auto c = sample_ensemble({1.0, 0.01, 10}, kPlus, 1.0, 2);
  EXPECT_NE(a[0].phase, c[0].phase);
}

TEST(Decoherence, PhaseMeanAndVarianceMatchIncrementStatistics) {
  const double tau = 1.0, t = 1.0;
  const auto ens = sample_ensemble({tau, 0.01, 3}, kPlus, t, 4000);
  double s = 0, s2 = 0;
  for (const auto& tr : ens) {
    s += tr.phase.back();
    s2 += tr.phase.back() * tr.phase.back();
  }
  const double n = double(ens.size());
  const double mean = s / n, var = s2 / n - mean * mean;
  const double expected_var = 2 * t / tau;
  EXPECT_NEAR(mean, 0.0, 3 * std::sqrt(expected_var / n));
  EXPECT_NEAR(var, expected_var, 0.05 * expected_var);
}

TEST(Decoherence, EnsembleCoherenceMatchesMasterEquation) {
  const auto ens = sample_ensemble({1.0, 0.01, 7}, kPlus, 1.0, 10000);
  const auto series = ensemble_offdiagonal(ens);
  const auto master = evolve_master(TwoBranchState::pure(kPlus), 1.0, 1.0);
  const std::size_t last = series.t.size() - 1;
  EXPECT_NEAR(series.mean[last].real(), master.rho[0][1].real(), 3 * series.standard_error[last]);
  const auto fit = fit_decay_rate(series);
  EXPECT_NEAR(fit.rate, 1.0, 0.05);
}

TEST(Decoherence, DuplicatedTrajectoryHasZeroError) {
  const auto tr = sample_trajectory({1.0, 0.01, 1}, kPlus, 0.5);
  const auto series = ensemble_offdiagonal({tr, tr, tr, tr});
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    EXPECT_EQ(series.mean[i], tr.psi[i][0] * std::conj(tr.psi[i][1]));
    EXPECT_NEAR(series.standard_error[i], 0.0, 1e-15);
  }
}

TEST(Decoherence, MismatchedGridsRejected) {
  const auto a = sample_trajectory({1.0, 0.01, 1}, kPlus, 0.5);
  const auto b = sample_trajectory({1.0, 0.01, 1}, kPlus, 0.6);
  EXPECT_THROW(ensemble_offdiagonal({a, b}), InvalidInput);
  EXPECT_THROW(ensemble_offdiagonal({a}), InvalidInput);
}
