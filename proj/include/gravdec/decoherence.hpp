#pragma once

// Two-branch dephasing: the master equation restricted to the span of two
// mass configurations {X, X'} (Hamiltonian zero on that span) and its
// stochastic unravelling as a random relative phase.
//
// The white-noise potential enters only through the difference of its
// integrals over the two branch densities; that difference is a scalar white
// noise whose variance rate fixes tau_d. The relative phase theta therefore
// takes independent N(0, 2 dt / tau_d) increments, and E[exp(i theta)] decays
// as exp(-t / tau_d).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "gravdec/error.hpp"
#include "gravdec/random.hpp"

namespace gravdec {

using cplx = std::complex<double>;
using Amplitudes = std::array<cplx, 2>;

struct TwoBranchState {
  std::array<std::array<cplx, 2>, 2> rho{};
  double t = 0;

  static TwoBranchState pure(const Amplitudes& psi, double t = 0) {
    TwoBranchState s;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s.rho[i][j] = psi[i] * std::conj(psi[j]);
    s.t = t;
    return s;
  }

  double trace() const { return rho[0][0].real() + rho[1][1].real(); }

  void validate() const {
    require(std::abs(trace() - 1.0) <= 1e-12, "density matrix trace must be 1");
    require(std::abs(rho[0][1] - std::conj(rho[1][0])) <= 1e-12 && std::abs(rho[0][0].imag()) <= 1e-12 &&
                std::abs(rho[1][1].imag()) <= 1e-12,
            "density matrix must be Hermitian");
    for (int i = 0; i < 2; ++i)
      require(rho[i][i].real() >= -1e-12 && rho[i][i].real() <= 1 + 1e-12, "populations must lie in [0,1]");
  }
};

/// Closed-form solution on the two-branch span: populations fixed, coherences
/// multiplied by exp(-(t_final - t) / tau_d).
inline TwoBranchState evolve_master(const TwoBranchState& state, double tau_d, double t_final) {
  state.validate();
  require(tau_d > 0, "tau_d must be positive");
  require(t_final >= state.t, "cannot evolve backwards in time");
  TwoBranchState out = state;
  const double damp = std::exp(-(t_final - state.t) / tau_d);
  out.rho[0][1] *= damp;
  out.rho[1][0] *= damp;
  out.t = t_final;
  return out;
}

struct NoiseSpec {
  double tau_d = 1;
  double dt = 0.01;
  std::uint64_t seed = 1;

  void validate() const {
    require(tau_d > 0 && std::isfinite(tau_d), "noise: tau_d must be positive");
    require(dt > 0, "noise: dt must be positive");
    require(dt <= tau_d / 100 * (1 + 1e-12), "noise: dt must not exceed tau_d/100");
  }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Amplitudes> psi;
  std::vector<double> phase;  // accumulated relative phase theta(t)
};

/// One unravelling trajectory. Each step multiplies the branches by
/// exp(∓i dtheta/2), so the norm is preserved up to rounding. The stream
/// depends only on (spec.seed, index).
inline Trajectory sample_trajectory(const NoiseSpec& spec, const Amplitudes& psi0, double t_final,
                                    std::uint64_t index = 0) {
  spec.validate();
  const double norm2 = std::norm(psi0[0]) + std::norm(psi0[1]);
  require(std::abs(norm2 - 1.0) <= 1e-12, "initial state must be normalized");
  require(t_final >= 0, "t_final must be non-negative");
  const auto steps = static_cast<std::size_t>(std::llround(t_final / spec.dt));
  const double dt = steps ? t_final / double(steps) : spec.dt;
  require(dt <= spec.tau_d / 100 * (1 + 1e-9), "noise: dt too large relative to tau_d");

  auto rng = substream(spec.seed, index);
  std::normal_distribution<double> gauss(0.0, std::sqrt(2 * dt / spec.tau_d));
  Trajectory tr;
  tr.t.reserve(steps + 1);
  tr.psi.reserve(steps + 1);
  tr.phase.reserve(steps + 1);
  Amplitudes psi = psi0;
  double theta = 0;
  tr.t.push_back(0);
  tr.psi.push_back(psi);
  tr.phase.push_back(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const double dtheta = gauss(rng);
    theta += dtheta;
    psi[0] *= std::polar(1.0, -0.5 * dtheta);
    psi[1] *= std::polar(1.0, 0.5 * dtheta);
    tr.t.push_back(double(n) * dt);
    tr.psi.push_back(psi);
    tr.phase.push_back(theta);
  }
  return tr;
}

inline std::vector<Trajectory> sample_ensemble(const NoiseSpec& spec, const Amplitudes& psi0, double t_final,
                                               std::size_t count) {
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_trajectory(spec, psi0, t_final, i));
  return out;
}

struct CoherenceSeries {
  std::vector<double> t;
  std::vector<cplx> mean;               // E[psi0 conj(psi1)]
  std::vector<double> standard_error;   // of the complex mean
};

inline CoherenceSeries ensemble_offdiagonal(const std::vector<Trajectory>& trajectories) {
  require(trajectories.size() >= 2, "ensemble needs at least two trajectories");
  const auto& grid = trajectories.front().t;
  for (const auto& tr : trajectories) require(tr.t == grid, "trajectories must share one time grid");
  const double n = double(trajectories.size());
  CoherenceSeries out;
  out.t = grid;
  out.mean.resize(grid.size());
  out.standard_error.resize(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    cplx sum = 0;
    for (const auto& tr : trajectories) sum += tr.psi[s][0] * std::conj(tr.psi[s][1]);
    const cplx mean = sum / n;
    double ss = 0;
    for (const auto& tr : trajectories) ss += std::norm(tr.psi[s][0] * std::conj(tr.psi[s][1]) - mean);
    out.mean[s] = mean;
    out.standard_error[s] = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

struct DecayFit {
  double rate = 0;       // fitted 1/tau
  double intercept = 0;  // fitted log|c(0)|
  std::size_t points = 0;
};

/// Least-squares slope of -log|mean| against t, using points whose modulus
/// exceeds `min_snr` standard errors.
inline DecayFit fit_decay_rate(const CoherenceSeries& series, double min_snr = 5.0) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const double m = std::abs(series.mean[i]);
    if (!(m > 0) || m < min_snr * series.standard_error[i]) continue;
    const double x = series.t[i], y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, "not enough resolved points to fit a decay rate");
  const double slope = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
  return {-slope, (sy - slope * sx) / double(n), n};
}

}  // namespace gravdec
