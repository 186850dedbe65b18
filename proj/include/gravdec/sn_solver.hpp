#pragma once

// Schrodinger-Newton dynamics for one or several independent-particle
// branches,
//
//   i hbar d/dt psi_s = -hbar^2/(2 m_s) nabla^2 psi_s + V_s psi_s,
//   V_s(x) = -G m_s sum_u m_u ∫ |psi_u(x')|^2 / |x - x'| d^3x',
//
// where the sum includes u = s (self-interaction, the SN form) or excludes
// it (Hartree form) according to SNParams::include_self.
//
// Two field geometries share one interface:
//   radial    - spherically symmetric fields stored as u(r) = sqrt(4π) r psi(r)
//               at r_i = (i+1) h, i = 0..n-2, h = extent/n, with u(0) = u(extent) = 0.
//               The kinetic operator is diagonal in the type-I sine basis and
//               the potential comes from exact shell integrals.
//   cartesian - n^3 samples on a periodic box of side `extent` centred on the
//               origin; kinetic step by FFT, potential by the isolated
//               (zero-padded) Poisson solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gravdec/error.hpp"
#include "gravdec/fft.hpp"
#include "gravdec/poisson.hpp"
#include "gravdec/units.hpp"

namespace gravdec {

enum class Geometry { radial, cartesian };

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct WaveField {
  Geometry geometry = Geometry::radial;
  int n = 0;          // intervals (radial) or points per axis (cartesian)
  double extent = 0;  // outer radius (radial) or box side (cartesian), m
  std::vector<cplx> values;
  double t = 0;

  static WaveField zeros(Geometry g, int n, double extent) {
    require(is_power_of_two(n) && n >= 4, "wave field: n must be a power of two >= 4");
    require(extent > 0, "wave field: extent must be positive");
    WaveField f;
    f.geometry = g;
    f.n = n;
    f.extent = extent;
    f.values.assign(g == Geometry::radial ? std::size_t(n - 1) : std::size_t(n) * n * n, cplx{});
    return f;
  }

  double spacing() const { return extent / n; }
  std::size_t size() const { return values.size(); }
  /// Volume element attached to one sample.
  double weight() const {
    const double h = spacing();
    return geometry == Geometry::radial ? h : h * h * h;
  }
  /// Radius of sample i (radial only).
  double radius(std::size_t i) const { return double(i + 1) * spacing(); }
  /// Coordinate of index i along one axis (cartesian only).
  double axis_coordinate(int i) const { return -0.5 * extent + i * spacing(); }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n + j) * n + k; }

  double norm2() const {
    double s = 0;
    for (const auto& v : values) s += std::norm(v);
    return s * weight();
  }
  void normalize() {
    const double nn = norm2();
    require(nn > 0, "cannot normalize a zero field");
    const double f = 1.0 / std::sqrt(nn);
    for (auto& v : values) v *= f;
  }
  bool same_grid(const WaveField& o) const { return geometry == o.geometry && n == o.n && extent == o.extent; }

  /// Probability per sample volume: |u|^2 = dP/dr (radial) or |psi|^2 (cartesian).
  std::vector<double> probability_density() const {
    std::vector<double> d(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) d[i] = std::norm(values[i]);
    return d;
  }

  /// <|x - x0|^2>, about the origin (radial) or the mean position (cartesian).
  double second_moment() const {
    if (geometry == Geometry::radial) {
      double s = 0;
      for (std::size_t i = 0; i < values.size(); ++i) s += radius(i) * radius(i) * std::norm(values[i]);
      return s * weight() / norm2();
    }
    std::array<double, 3> mean{0, 0, 0};
    double total = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double p = std::norm(values[index(i, j, k)]);
          total += p;
          mean[0] += p * axis_coordinate(i);
          mean[1] += p * axis_coordinate(j);
          mean[2] += p * axis_coordinate(k);
        }
    for (auto& m : mean) m /= total;
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double dx = axis_coordinate(i) - mean[0], dy = axis_coordinate(j) - mean[1],
                       dz = axis_coordinate(k) - mean[2];
          s += (dx * dx + dy * dy + dz * dz) * std::norm(values[index(i, j, k)]);
        }
    return s / total;
  }
};

/// Radial field from psi(r) (normalized on return).
inline WaveField make_radial_field(int n, double extent, const std::function<cplx(double)>& psi) {
  WaveField f = WaveField::zeros(Geometry::radial, n, extent);
  const double c = std::sqrt(4 * std::numbers::pi);
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = c * f.radius(i) * psi(f.radius(i));
  f.normalize();
  return f;
}

/// Cartesian field from psi(x, y, z) (normalized on return).
inline WaveField make_cartesian_field(int n, double extent, const std::function<cplx(double, double, double)>& psi) {
  WaveField f = WaveField::zeros(Geometry::cartesian, n, extent);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        f.values[f.index(i, j, k)] = psi(f.axis_coordinate(i), f.axis_coordinate(j), f.axis_coordinate(k));
  f.normalize();
  return f;
}

/// Isotropic Gaussian with per-axis standard deviation sigma of |psi|^2.
inline WaveField gaussian_field(Geometry g, int n, double extent, double sigma, std::array<double, 3> centre = {}) {
  require(sigma > 0, "gaussian width must be positive");
  const double a = 1.0 / (4 * sigma * sigma);
  if (g == Geometry::radial) return make_radial_field(n, extent, [a](double r) { return cplx(std::exp(-a * r * r)); });
  return make_cartesian_field(n, extent, [a, centre](double x, double y, double z) {
    const double dx = x - centre[0], dy = y - centre[1], dz = z - centre[2];
    return cplx(std::exp(-a * (dx * dx + dy * dy + dz * dz)));
  });
}

struct SNParams {
  double m = 1;  // kg, single-branch particle mass
  PhysicalConstants constants = PhysicalConstants::unit();
  bool include_self = true;
  std::vector<double> masses;  // per-branch masses; empty -> m for every branch

  double mass_of(std::size_t s) const { return masses.empty() ? m : masses.at(s); }
  void validate(std::size_t branches) const {
    require(m > 0, "SN: particle mass must be positive");
    // G = 0 (free evolution) is a legitimate SN configuration.
    require(constants.G >= 0 && std::isfinite(constants.G), "SN: G must be non-negative");
    require(constants.hbar > 0 && std::isfinite(constants.hbar), "SN: hbar must be positive");
    require(masses.empty() || masses.size() == branches, "SN: one mass per branch required");
    for (double x : masses) require(x > 0, "SN: branch masses must be positive");
  }

  /// Natural units of the single-particle equation with mass m.
  double length_unit() const { return constants.hbar * constants.hbar / (constants.G * m * m * m); }
  double energy_unit() const {
    return constants.G * constants.G * std::pow(m, 5) / (constants.hbar * constants.hbar);
  }
  double time_unit() const { return constants.hbar / energy_unit(); }
};

/// Spectral machinery for one grid: kinetic propagation, kinetic energy,
/// Laplacian and the self-consistent potential.
class SpectralGrid {
 public:
  SpectralGrid(Geometry g, int n, double extent) : geometry_(g), n_(n), extent_(extent), h_(extent / n) {
    require(is_power_of_two(n) && n >= 4, "spectral grid: n must be a power of two >= 4");
    if (g == Geometry::radial) {
      dst_ = std::make_unique<SineTransform>(n - 1);
      k2_.resize(n - 1);
      for (int j = 0; j < n - 1; ++j) {
        const double k = std::numbers::pi * (j + 1) / extent;
        k2_[j] = k * k;
      }
    } else {
      fft_ = std::make_unique<ComplexFft>(std::vector<int>{n, n, n});
      poisson_ = std::make_unique<FreeSpacePoisson>(std::array<int, 3>{n, n, n}, h_);
      k2_.resize(std::size_t(n) * n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const double kx = fft_wavenumber(i, n, h_), ky = fft_wavenumber(j, n, h_), kz = fft_wavenumber(k, n, h_);
            k2_[(std::size_t(i) * n + j) * n + k] = kx * kx + ky * ky + kz * kz;
          }
    }
  }

  explicit SpectralGrid(const WaveField& f) : SpectralGrid(f.geometry, f.n, f.extent) {}

  bool matches(const WaveField& f) const { return f.geometry == geometry_ && f.n == n_ && f.extent == extent_; }

  /// values <- F^{-1} [ multiplier(k^2) F values ].
  template <class Multiplier>
  void apply_spectral(std::span<cplx> values, Multiplier&& multiplier) const {
    if (geometry_ == Geometry::radial) {
      dst_->apply(values, re_, im_);
      const double s = dst_->inverse_scale();
      for (std::size_t j = 0; j < values.size(); ++j) values[j] *= multiplier(k2_[j]) * s;
      dst_->apply(values, re_, im_);
    } else {
      fft_->forward(values);
      const double s = 1.0 / double(fft_->size());
      for (std::size_t j = 0; j < values.size(); ++j) values[j] *= multiplier(k2_[j]) * s;
      fft_->backward(values);
    }
  }

  /// <psi| k^2 |psi> * weight, i.e. the integral of |grad psi|^2.
  double gradient_norm2(std::span<const cplx> values) const {
    std::vector<cplx> w(values.begin(), values.end());
    double s = 0, parseval = 0;
    if (geometry_ == Geometry::radial) {
      dst_->apply(w, re_, im_);
      parseval = 2.0 * n_;  // sum |X|^2 = 2(N+1) sum |x|^2 with N = n-1
    } else {
      fft_->forward(w);
      parseval = double(fft_->size());
    }
    for (std::size_t j = 0; j < w.size(); ++j) s += k2_[j] * std::norm(w[j]);
    return s / parseval * weight();
  }

  /// Gravitational potential per unit test mass generated by the mass
  /// density `mass_per_sample` (kg per unit sample weight: dM/dr for radial,
  /// kg m^-3 for cartesian).
  std::vector<double> potential(std::span<const double> mass_per_sample, double G) const {
    if (geometry_ == Geometry::radial) return radial_potential(mass_per_sample, h_, G);
    return poisson_->solve(mass_per_sample, G);
  }

  double weight() const { return geometry_ == Geometry::radial ? h_ : h_ * h_ * h_; }
  const FreeSpacePoisson* poisson() const { return poisson_.get(); }

 private:
  Geometry geometry_;
  int n_;
  double extent_;
  double h_;
  std::vector<double> k2_;
  std::unique_ptr<SineTransform> dst_;
  std::unique_ptr<ComplexFft> fft_;
  std::unique_ptr<FreeSpacePoisson> poisson_;
  mutable std::vector<double> re_, im_;
};

namespace detail {

inline void check_branches(const std::vector<WaveField>& fields) {
  require(!fields.empty(), "at least one field required");
  for (const auto& f : fields) require(f.same_grid(fields.front()), "all branch fields must share one grid");
}

inline std::vector<double> potential_for(const SpectralGrid& grid, const std::vector<WaveField>& fields,
                                         const SNParams& p, std::size_t s) {
  std::vector<double> source(fields.front().size(), 0.0);
  bool any = false;
  for (std::size_t u = 0; u < fields.size(); ++u) {
    if (u == s && !p.include_self) continue;
    const double mu = p.mass_of(u);
    for (std::size_t i = 0; i < source.size(); ++i) source[i] += mu * std::norm(fields[u].values[i]);
    any = true;
  }
  std::vector<double> v(source.size(), 0.0);
  if (!any) return v;
  v = grid.potential(source, p.constants.G);
  const double ms = p.mass_of(s);
  for (auto& x : v) x *= ms;
  return v;
}

}  // namespace detail

/// Potential energy V_s(x) (J) felt by branch s.
inline std::vector<double> effective_potential(const std::vector<WaveField>& fields, const SNParams& params,
                                               std::size_t s) {
  detail::check_branches(fields);
  require(s < fields.size(), "branch index out of range");
  params.validate(fields.size());
  for (const auto& f : fields) require(std::abs(f.norm2() - 1.0) <= 1e-8, "branch fields must be normalized");
  const SpectralGrid grid(fields.front());
  return detail::potential_for(grid, fields, params, s);
}

struct EnergyBreakdown {
  double kinetic = 0;
  double potential = 0;  // (1/2) sum_s <V_s>: each pair counted once
  double total() const { return kinetic + potential; }
};

inline EnergyBreakdown sn_energy(const SpectralGrid& grid, const std::vector<WaveField>& fields, const SNParams& p) {
  EnergyBreakdown e;
  const double hb = p.constants.hbar;
  for (std::size_t s = 0; s < fields.size(); ++s) {
    e.kinetic += hb * hb / (2 * p.mass_of(s)) * grid.gradient_norm2(fields[s].values);
    const auto v = detail::potential_for(grid, fields, p, s);
    double pv = 0;
    for (std::size_t i = 0; i < v.size(); ++i) pv += v[i] * std::norm(fields[s].values[i]);
    e.potential += 0.5 * pv * fields[s].weight();
  }
  return e;
}

inline EnergyBreakdown sn_energy(const std::vector<WaveField>& fields, const SNParams& p) {
  detail::check_branches(fields);
  return sn_energy(SpectralGrid(fields.front()), fields, p);
}

/// Called after every completed step with the current fields.
using StepObserver = std::function<void(std::size_t step, const std::vector<WaveField>&)>;

/// Strang-split evolution of coupled branches: half potential kick, full
/// kinetic step, half kick with the potential rebuilt from the new
/// densities. A kick preserves |psi|, so the potential at the start of a step
/// equals the one that closed the previous step and one rebuild per step
/// suffices. Rejects dt when max|V| dt / hbar > π/4.
inline std::vector<WaveField> evolve_branches(std::vector<WaveField> fields, const SNParams& params, double dt,
                                              std::size_t n_steps, const StepObserver& observer = {}) {
  detail::check_branches(fields);
  params.validate(fields.size());
  require(dt > 0, "time step must be positive");
  for (const auto& f : fields) require(std::abs(f.norm2() - 1.0) <= 1e-8, "branch fields must be normalized");
  const SpectralGrid grid(fields.front());
  const double hb = params.constants.hbar;

  std::vector<std::vector<double>> pot(fields.size());
  auto rebuild = [&] {
    for (std::size_t s = 0; s < fields.size(); ++s) pot[s] = detail::potential_for(grid, fields, params, s);
  };
  auto kick = [&] {
    for (std::size_t s = 0; s < fields.size(); ++s) {
      double vmax = 0;
      for (double v : pot[s]) vmax = std::max(vmax, std::abs(v));
      if (vmax * dt / hb > std::numbers::pi / 4)
        throw InvalidInput("time step too large: max|V| dt / hbar exceeds pi/4");
      for (std::size_t i = 0; i < pot[s].size(); ++i) fields[s].values[i] *= std::polar(1.0, -0.5 * pot[s][i] * dt / hb);
    }
  };

  rebuild();
  for (std::size_t step = 1; step <= n_steps; ++step) {
    kick();
    for (std::size_t s = 0; s < fields.size(); ++s) {
      const double c = hb * dt / (2 * params.mass_of(s));
      grid.apply_spectral(fields[s].values, [c](double k2) { return std::polar(1.0, -c * k2); });
    }
    rebuild();
    kick();
    for (auto& f : fields) f.t += dt;
    if (observer) observer(step, fields);
  }
  return fields;
}

/// Single-branch evolution (the one-particle SN equation when include_self).
inline WaveField evolve_split_step(const WaveField& field, const SNParams& params, double dt, std::size_t n_steps,
                                   const StepObserver& observer = {}) {
  return evolve_branches({field}, params, dt, n_steps, observer).front();
}

/// Per-branch rephasing psi_s -> exp(-i c_s t / hbar) psi_s, removing
/// separation constants c_s (J) that sum to zero. The product of the branch
/// wavefunctions is unchanged.
inline std::vector<WaveField> gauge_rephase(std::vector<WaveField> fields, std::span<const double> cs,
                                            double hbar = 1.0) {
  require(cs.size() == fields.size(), "one separation constant per branch required");
  double sum = 0, scale = 0;
  for (double c : cs) {
    sum += c;
    scale += std::abs(c);
  }
  require(std::abs(sum) <= 1e-12 * std::max(scale, 1e-300) || scale == 0, "separation constants must sum to zero");
  for (std::size_t s = 0; s < fields.size(); ++s) {
    const cplx phase = std::polar(1.0, -cs[s] * fields[s].t / hbar);
    for (auto& v : fields[s].values) v *= phase;
  }
  return fields;
}

/// F_s = -i hbar dpsi_s/dt - hbar^2/(2 m_s) nabla^2 psi_s + V_s psi_s for the
/// supplied time derivative; zero on a solution of the coupled equations.
inline std::vector<cplx> sn_residual(const std::vector<WaveField>& fields, const SNParams& params, std::size_t s,
                                     std::span<const cplx> dpsi_dt) {
  detail::check_branches(fields);
  require(s < fields.size(), "branch index out of range");
  require(dpsi_dt.size() == fields[s].size(), "time derivative has wrong size");
  const SpectralGrid grid(fields.front());
  const double hb = params.constants.hbar;
  std::vector<cplx> lap(fields[s].values);
  const double c = hb * hb / (2 * params.mass_of(s));
  grid.apply_spectral(lap, [c](double k2) { return cplx(c * k2); });  // -hbar^2/2m nabla^2
  const auto v = detail::potential_for(grid, fields, params, s);
  std::vector<cplx> f(lap.size());
  const cplx mi(0, -hb);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = mi * dpsi_dt[i] + lap[i] + v[i] * fields[s].values[i];
  return f;
}

inline double field_norm(std::span<const cplx> v, double weight) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s * weight);
}

// ---------------------------------------------------------------------------
// Ground state

enum class GroundStateMethod { imaginary_time, radial_shooting };

struct GroundStateOptions {
  int n = 1024;             // radial intervals
  double extent = 0;        // m; 0 -> 40 natural length units
  double dtau = 0.04;        // imaginary-time step, natural time units
  double tolerance = 1e-10;  // eigenvalue change per step, natural energy units
  std::size_t max_steps = 200000;
  double shooting_rmax = 20;  // natural length units; capped where the bracket diverges
};

struct GroundState {
  double eigenvalue = 0;       // J; psi(t) = exp(-i E t / hbar) u
  double energy = 0;           // J; kinetic + (1/2) potential
  WaveField profile;           // radial, normalized
  std::vector<double> potential;  // J, V(r) on the profile grid
  std::size_t iterations = 0;
};

namespace detail {

inline double eigenvalue_of(const SpectralGrid& grid, const WaveField& f, const std::vector<double>& v,
                            const SNParams& p) {
  const double hb = p.constants.hbar;
  double pv = 0;
  for (std::size_t i = 0; i < v.size(); ++i) pv += v[i] * std::norm(f.values[i]);
  return hb * hb / (2 * p.m) * grid.gradient_norm2(f.values) + pv * f.weight();
}

// Relaxes to the fixed point of one Strang imaginary-time step of size tau;
// returns the eigenvalue estimate at that fixed point.
inline double relax_imaginary_time(const SpectralGrid& grid, WaveField& f, std::vector<double>& v,
                                   const SNParams& p, double tau, double tol, std::size_t max_steps,
                                   std::size_t& steps) {
  const double hb = p.constants.hbar;
  const double c = hb * tau / (2 * p.m);
  SNParams single = p;
  single.include_self = true;
  single.masses.clear();
  auto pot = [&] { return potential_for(grid, {f}, single, 0); };
  v = pot();
  double mu = eigenvalue_of(grid, f, v, p);
  double change = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < max_steps; ++k) {
    ++steps;
    for (std::size_t i = 0; i < v.size(); ++i) f.values[i] *= std::exp(-0.5 * v[i] * tau / hb);
    grid.apply_spectral(f.values, [c](double k2) { return cplx(std::exp(-c * k2)); });
    // Same potential for both half steps: the fixed point is then that of a
    // symmetric product and its bias is O(tau^2).
    for (std::size_t i = 0; i < v.size(); ++i) f.values[i] *= std::exp(-0.5 * v[i] * tau / hb);
    f.normalize();
    v = pot();
    const double next = eigenvalue_of(grid, f, v, p);
    change = std::abs(next - mu);
    mu = next;
    if (change < tol) return mu;
  }
  throw ConvergenceError("imaginary-time relaxation did not converge", mu, change);
}

// Convergence per step is geometric with ratio ~ exp(-gap tau), so the
// remaining eigenvalue error is roughly tolerance / (gap tau); the default
// per-step tolerance is set well below the target accuracy for that reason.
inline GroundState ground_state_imaginary_time(const SNParams& p, const GroundStateOptions& o) {
  const double L = o.extent > 0 ? o.extent : 40 * p.length_unit();
  WaveField f = gaussian_field(Geometry::radial, o.n, L, 2 * p.length_unit());
  const SpectralGrid grid(f);
  SNParams single = p;
  single.include_self = true;
  single.masses.clear();
  const double tau = o.dtau * p.time_unit();
  const double tol = o.tolerance * p.energy_unit();
  std::vector<double> v;
  std::size_t steps = 0;
  GroundState g;
  g.eigenvalue = relax_imaginary_time(grid, f, v, p, tau, tol, o.max_steps, steps);
  g.energy = sn_energy(grid, {f}, single).total();
  g.potential = v;
  g.profile = std::move(f);
  g.iterations = steps;
  return g;
}

// Radial shooting in natural units (hbar = m = G = 1). With W = V - E and
// Y = r W the stationary equations read
//   u'' = 2 (Y / r) u,   Y'' = u^2 / r,   M' = u^2,
// and the family is fixed by u'(0) = 1. Bisection on W(0) separates
// solutions that cross zero (W(0) too low) from ones that turn back up
// (too high). The converged solution is rescaled to unit norm through the
// exact symmetry u -> λ u(λ r), E -> λ^2 E.
struct ShootingSolution {
  std::vector<double> r, u, du;  // unnormalized samples up to r_match
  double energy = 0;             // unnormalized eigenvalue
  double mass = 0;               // ∫ u^2 including the exponential tail
  double kappa = 0;              // tail decay rate sqrt(-2E)
  double r_match = 0;
};

struct ShootState {
  double u, du, Y, dY, M;
};

inline ShootState shoot_rhs(double r, const ShootState& s) {
  return {s.du, 2 * (s.Y / r) * s.u, s.dY, s.u * s.u / r, s.u * s.u};
}

inline ShootState shoot_step(double r, const ShootState& s, double h) {
  auto add = [](const ShootState& a, const ShootState& b, double f) {
    return ShootState{a.u + f * b.u, a.du + f * b.du, a.Y + f * b.Y, a.dY + f * b.dY, a.M + f * b.M};
  };
  const ShootState k1 = shoot_rhs(r, s);
  const ShootState k2 = shoot_rhs(r + h / 2, add(s, k1, h / 2));
  const ShootState k3 = shoot_rhs(r + h / 2, add(s, k2, h / 2));
  const ShootState k4 = shoot_rhs(r + h, add(s, k3, h));
  return {s.u + h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u), s.du + h / 6 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du),
          s.Y + h / 6 * (k1.Y + 2 * k2.Y + 2 * k3.Y + k4.Y), s.dY + h / 6 * (k1.dY + 2 * k2.dY + 2 * k3.dY + k4.dY),
          s.M + h / 6 * (k1.M + 2 * k2.M + 2 * k3.M + k4.M)};
}

inline ShootState shoot_start(double w0, double r0) {
  return {r0 + w0 * r0 * r0 * r0 / 3, 1 + w0 * r0 * r0, w0 * r0 + r0 * r0 * r0 / 6, w0 + r0 * r0 / 2, r0 * r0 * r0 / 3};
}

// +1: turns back up (W0 too high), -1: crosses zero (too low).
inline int shoot_classify(double w0, double h, std::vector<ShootState>* trace = nullptr) {
  double r = h;
  ShootState s = shoot_start(w0, r);
  if (trace) trace->assign(1, s);
  bool descending = false;
  for (std::size_t i = 0; i < 50'000'000; ++i) {
    s = shoot_step(r, s, h);
    r += h;
    if (trace) trace->push_back(s);
    if (s.u < 0) return -1;
    if (s.du < 0) descending = true;
    if (descending && s.du > 0) return +1;
    // W = Y/r never decreases, so u' > 0 with W >= 0 grows without bound.
    if (s.du > 0 && s.Y >= 0) return +1;
  }
  throw ConvergenceError("radial shooting: integration did not classify", w0, 0);
}

inline ShootingSolution shoot_ground_state(double rmax_natural) {
  // Bracket the central shift.
  double lo = -1.0, hi = -1.0;
  const double h0 = 1e-3;
  while (shoot_classify(lo, h0) > 0) lo *= 2;
  hi = lo;
  while (shoot_classify(hi, h0) < 0) hi /= 2;
  if (hi == lo) lo = hi * 2;
  // Step size from the central length scale 1/sqrt(|W0|).
  auto step_for = [](double w0) { return 2e-3 / std::sqrt(std::abs(w0)); };
  const double h = step_for(hi);
  while (shoot_classify(lo, h) > 0) lo *= 1.5;
  while (shoot_classify(hi, h) < 0) hi /= 1.5;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (shoot_classify(mid, h) > 0 ? hi : lo) = mid;
  }
  std::vector<ShootState> a, b;
  shoot_classify(lo, h, &a);
  shoot_classify(hi, h, &b);
  // Trust the solution while the bracketing pair agrees.
  const std::size_t len = std::min(a.size(), b.size());
  std::size_t last = 0;
  for (std::size_t i = 1; i < len; ++i) {
    const double um = 0.5 * (a[i].u + b[i].u);
    if (std::abs(a[i].u - b[i].u) > 1e-6 * std::abs(um) || um <= 0) break;
    last = i;
  }
  // Limit to rmax in normalized units; normalization ~ M at that point.
  ShootingSolution sol;
  std::size_t end = last;
  for (std::size_t i = 1; i <= last; ++i) {
    const double r = h * double(i + 1);
    const double m = 0.5 * (a[i].M + b[i].M);
    if (r * m >= rmax_natural) {
      end = i;
      break;
    }
  }
  require(end > 10, "radial shooting: solution resolved over too few steps");
  sol.r.resize(end + 1);
  sol.u.resize(end + 1);
  sol.du.resize(end + 1);
  for (std::size_t i = 0; i <= end; ++i) {
    sol.r[i] = h * double(i + 1);
    sol.u[i] = 0.5 * (a[i].u + b[i].u);
    sol.du[i] = 0.5 * (a[i].du + b[i].du);
  }
  const ShootState& e = a[end];
  const double rm = sol.r.back();
  const double w = 0.5 * (a[end].Y + b[end].Y) / rm;
  const double menc = 0.5 * (a[end].M + b[end].M);
  // Outside the matter V = -M/r, so -E = W + M/r.
  sol.energy = -(w + menc / rm);
  require(sol.energy < 0, "radial shooting: no bound state found");
  sol.kappa = std::sqrt(-2 * sol.energy);
  (void)e;
  const double uend = sol.u.back();
  sol.mass = menc + uend * uend / (2 * sol.kappa);
  sol.r_match = rm;
  return sol;
}

inline GroundState ground_state_shooting(const SNParams& p, const GroundStateOptions& o) {
  const ShootingSolution sol = shoot_ground_state(o.shooting_rmax);
  const double lambda = 1.0 / sol.mass;  // normalized u_n(r) = λ u(λ r)
  const double a0 = p.length_unit();
  const double L = o.extent > 0 ? o.extent : 40 * a0;
  WaveField f = WaveField::zeros(Geometry::radial, o.n, L);
  const double kappa = sol.kappa;
  const double beta = sol.mass / kappa;  // u ~ r^beta e^{-kappa r} beyond the matter
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double rs = lambda * f.radius(i) / a0;  // unnormalized shooting radius
    double u = 0;
    if (rs <= sol.r.front()) {
      u = rs * sol.du.front();
    } else if (rs >= sol.r_match) {
      const double um = sol.u.back();
      u = um * std::pow(rs / sol.r_match, beta) * std::exp(-kappa * (rs - sol.r_match));
    } else {
      const double hstep = sol.r[1] - sol.r[0];
      const std::size_t j = std::min(sol.r.size() - 2, std::size_t((rs - sol.r.front()) / hstep));
      const double t = (rs - sol.r[j]) / hstep;
      // cubic Hermite on (u, u')
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t), h01 = t * t * (3 - 2 * t),
                   h11 = t * t * (t - 1);
      u = h00 * sol.u[j] + h10 * hstep * sol.du[j] + h01 * sol.u[j + 1] + h11 * hstep * sol.du[j + 1];
    }
    f.values[i] = lambda * u / std::sqrt(a0);
  }
  f.normalize();
  GroundState g;
  g.eigenvalue = lambda * lambda * sol.energy * p.energy_unit();
  SNParams single = p;
  single.include_self = true;
  single.masses.clear();
  const SpectralGrid grid(f);
  g.potential = detail::potential_for(grid, {f}, single, 0);
  g.energy = sn_energy(grid, {f}, single).total();
  g.profile = std::move(f);
  g.iterations = sol.r.size();
  return g;
}

}  // namespace detail

/// Nodeless ground state of the single-particle SN equation.
inline GroundState ground_state(const SNParams& params, GroundStateMethod method, const GroundStateOptions& opt = {}) {
  params.validate(1);
  require(params.constants.G > 0, "ground state: a bound state needs G > 0");
  require(is_power_of_two(opt.n), "ground state: n must be a power of two");
  if (method == GroundStateMethod::imaginary_time) return detail::ground_state_imaginary_time(params, opt);
  return detail::ground_state_shooting(params, opt);
}

/// Self-consistent refinement of a radial stationary state: repeatedly takes
/// the lowest eigenvector of the discrete Hamiltonian -hbar^2/2m d^2/dr^2 + V[u]
/// (dense, in the sine basis) with linear mixing of the potential, until the
/// eigen-residual |H u - E u| drops below `tolerance` (natural units).
inline GroundState refine_stationary_state(const GroundState& start, const SNParams& p, double tolerance = 1e-10,
                                           std::size_t max_iterations = 200) {
  const WaveField& f0 = start.profile;
  require(f0.geometry == Geometry::radial, "refinement is implemented for radial fields");
  const int N = f0.n - 1;
  const double L = f0.extent;
  const double hb = p.constants.hbar;
  Eigen::MatrixXd Q(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k)
      Q(j, k) = std::sqrt(2.0 / (N + 1)) * std::sin(std::numbers::pi * (j + 1) * (k + 1) / (N + 1));
  Eigen::VectorXd tk(N);
  for (int k = 0; k < N; ++k) {
    const double kk = std::numbers::pi * (k + 1) / L;
    tk(k) = hb * hb * kk * kk / (2 * p.m);
  }
  const Eigen::MatrixXd T = Q * tk.asDiagonal() * Q;
  SNParams single = p;
  single.include_self = true;
  single.masses.clear();
  const SpectralGrid grid(f0);
  WaveField f = f0;
  std::vector<double> v = detail::potential_for(grid, {f}, single, 0);
  const double e_unit = p.energy_unit();
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Eigen::MatrixXd H = T;
    for (int j = 0; j < N; ++j) H(j, j) += v[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd u = es.eigenvectors().col(0);
    if (u.sum() < 0) u = -u;
    u /= std::sqrt(u.squaredNorm() * f.weight());
    for (int j = 0; j < N; ++j) f.values[j] = u(j);
    const auto vnew = detail::potential_for(grid, {f}, single, 0);
    // residual of the current pair (u, V[u])
    Eigen::MatrixXd Hn = T;
    for (int j = 0; j < N; ++j) Hn(j, j) += vnew[j];
    const double mu = u.dot(Hn * u) / u.squaredNorm();
    const double res = (Hn * u - mu * u).norm() * std::sqrt(f.weight()) / e_unit;
    for (int j = 0; j < N; ++j) v[j] = 0.5 * v[j] + 0.5 * vnew[j];
    if (res < tolerance) {
      GroundState g;
      g.eigenvalue = mu;
      g.potential = vnew;
      g.energy = sn_energy(grid, {f}, single).total();
      g.profile = f;
      g.iterations = it + 1;
      return g;
    }
  }
  throw ConvergenceError("stationary-state refinement did not converge", start.eigenvalue, 0);
}

}  // namespace gravdec
