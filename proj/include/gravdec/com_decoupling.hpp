#pragma once

// Two particles on a line, psi(x1, x2), evolved with the linear two-body
// Schrodinger equation. With an interaction depending only on x1 - x2 the
// centre of mass R = (m1 x1 + m2 x2) / M moves freely, so its marginal — and
// any interference it shows — cannot depend on G.
//
// Storage: values[i * n + j] = psi(x_i, x_j), x_i = -extent/2 + i h, periodic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "gravdec/error.hpp"
#include "gravdec/fft.hpp"

namespace gravdec {

struct TwoParticleField {
  int n = 0;
  double extent = 0;
  double m1 = 1, m2 = 1;
  std::vector<cplx> values;
  double t = 0;

  static TwoParticleField zeros(int n, double extent, double m1, double m2) {
    require(n >= 8 && (n & (n - 1)) == 0, "two-particle grid: n must be a power of two >= 8");
    require(extent > 0, "two-particle grid: extent must be positive");
    require(m1 > 0 && m2 > 0, "two-particle grid: masses must be positive");
    TwoParticleField f;
    f.n = n;
    f.extent = extent;
    f.m1 = m1;
    f.m2 = m2;
    f.values.assign(std::size_t(n) * n, cplx{});
    return f;
  }

  double spacing() const { return extent / n; }
  double coordinate(int i) const { return -0.5 * extent + i * spacing(); }
  double total_mass() const { return m1 + m2; }
  cplx& at(int i, int j) { return values[std::size_t(i) * n + j]; }
  const cplx& at(int i, int j) const { return values[std::size_t(i) * n + j]; }

  double norm2() const {
    double s = 0;
    for (const auto& v : values) s += std::norm(v);
    return s * spacing() * spacing();
  }
  void normalize() {
    const double nn = norm2();
    require(nn > 0, "cannot normalize a zero field");
    const double f = 1.0 / std::sqrt(nn);
    for (auto& v : values) v *= f;
  }
};

/// Field defined through centre-of-mass and relative coordinates,
/// psi(x1, x2) = Phi(R) chi(x1 - x2), normalized on return.
inline TwoParticleField make_com_relative_field(int n, double extent, double m1, double m2,
                                                const std::function<cplx(double)>& com,
                                                const std::function<cplx(double)>& rel) {
  auto f = TwoParticleField::zeros(n, extent, m1, m2);
  const double M = m1 + m2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x1 = f.coordinate(i), x2 = f.coordinate(j);
      f.at(i, j) = com((m1 * x1 + m2 * x2) / M) * rel(x1 - x2);
    }
  f.normalize();
  return f;
}

/// Product state psi1(x1) psi2(x2), normalized on return.
inline TwoParticleField make_product_field(int n, double extent, double m1, double m2,
                                           const std::function<cplx(double)>& psi1,
                                           const std::function<cplx(double)>& psi2) {
  auto f = TwoParticleField::zeros(n, extent, m1, m2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.at(i, j) = psi1(f.coordinate(i)) * psi2(f.coordinate(j));
  f.normalize();
  return f;
}

/// Gaussian packet with |psi|^2 standard deviation sigma, centre x0 and
/// mean momentum hbar k0.
inline cplx gaussian_packet(double x, double x0, double sigma, double k0) {
  const double u = x - x0;
  return std::exp(cplx(-u * u / (4 * sigma * sigma), k0 * u));
}

struct TwoPacketSpec {
  double separation = 4;   // packets start at R = ±separation (m)
  double momentum = 2 * std::numbers::pi;  // |P| of each CoM packet, toward the centre (kg m/s)
  double sigma_com = 0.5;  // m
  double sigma_rel = 1.0;  // m
  double amplitude_left = 1, amplitude_right = 1;
  double hbar = 1;
};

/// CoM superposition of two packets approaching each other, times a
/// Gaussian relative wavefunction. They overlap at t = separation M / momentum.
inline TwoParticleField make_two_packet_field(int n, double extent, double m1, double m2, const TwoPacketSpec& s) {
  require(s.amplitude_left >= 0 && s.amplitude_right >= 0 && s.amplitude_left + s.amplitude_right > 0,
          "two-packet amplitudes must be non-negative and not both zero");
  const double k = s.momentum / s.hbar;
  auto com = [&](double R) {
    return s.amplitude_left * gaussian_packet(R, -s.separation, s.sigma_com, k) +
           s.amplitude_right * gaussian_packet(R, s.separation, s.sigma_com, -k);
  };
  auto rel = [&](double r) { return gaussian_packet(r, 0, s.sigma_rel, 0); };
  return make_com_relative_field(n, extent, m1, m2, com, rel);
}

/// V(x1 - x2) = -G m1 m2 / sqrt((x1 - x2)^2 + eps^2) on the grid (J).
inline std::vector<double> softened_gravity(const TwoParticleField& f, double G, double eps) {
  require(eps > 0, "softening length must be positive");
  require(G >= 0, "G must be non-negative");
  std::vector<double> v(f.values.size());
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      const double r = f.coordinate(i) - f.coordinate(j);
      v[std::size_t(i) * f.n + j] = -G * f.m1 * f.m2 / std::sqrt(r * r + eps * eps);
    }
  return v;
}

/// Potential acting on particle 1 only — breaks the CoM/relative separation.
inline std::vector<double> external_potential_on_first(const TwoParticleField& f,
                                                       const std::function<double(double)>& v1) {
  std::vector<double> v(f.values.size());
  for (int i = 0; i < f.n; ++i) {
    const double vi = v1(f.coordinate(i));
    for (int j = 0; j < f.n; ++j) v[std::size_t(i) * f.n + j] = vi;
  }
  return v;
}

using TwoParticleObserver = std::function<void(std::size_t step, const TwoParticleField&)>;

/// Strang split-step with a fixed potential array (J). Rejects dt when
/// max|V| dt / hbar > π/4.
inline TwoParticleField evolve_two_particle(TwoParticleField field, std::span<const double> potential, double dt,
                                            std::size_t n_steps, double hbar = 1.0,
                                            const TwoParticleObserver& observer = {}) {
  require(potential.size() == field.values.size(), "potential does not match the grid");
  require(dt > 0, "time step must be positive");
  require(hbar > 0, "hbar must be positive");
  require(std::abs(field.norm2() - 1.0) <= 1e-8, "two-particle field must be normalized");
  double vmax = 0;
  for (double v : potential) vmax = std::max(vmax, std::abs(v));
  if (vmax * dt / hbar > std::numbers::pi / 4)
    throw InvalidInput("time step too large: max|V| dt / hbar exceeds pi/4");

  const int n = field.n;
  const double h = field.spacing();
  ComplexFft fft({n, n});
  std::vector<cplx> half_kick(potential.size()), drift(potential.size());
  for (std::size_t q = 0; q < potential.size(); ++q) half_kick[q] = std::polar(1.0, -0.5 * potential[q] * dt / hbar);
  const double scale = 1.0 / double(fft.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double k1 = fft_wavenumber(i, n, h), k2 = fft_wavenumber(j, n, h);
      const double e = hbar * (k1 * k1 / (2 * field.m1) + k2 * k2 / (2 * field.m2));
      drift[std::size_t(i) * n + j] = std::polar(scale, -e * dt);
    }
  for (std::size_t step = 1; step <= n_steps; ++step) {
    for (std::size_t q = 0; q < half_kick.size(); ++q) field.values[q] *= half_kick[q];
    fft.forward(field.values);
    for (std::size_t q = 0; q < drift.size(); ++q) field.values[q] *= drift[q];
    fft.backward(field.values);
    for (std::size_t q = 0; q < half_kick.size(); ++q) field.values[q] *= half_kick[q];
    field.t += dt;
    if (observer) observer(step, field);
  }
  return field;
}

/// Softened Newtonian pair interaction.
inline TwoParticleField evolve_two_particle(const TwoParticleField& field, double G, double eps, double dt,
                                            std::size_t n_steps, double hbar = 1.0,
                                            const TwoParticleObserver& observer = {}) {
  const auto v = softened_gravity(field, G, eps);
  return evolve_two_particle(field, v, dt, n_steps, hbar, observer);
}

struct Marginal {
  std::vector<double> x;
  std::vector<double> density;
  double spacing = 0;

  double integral() const {
    double s = 0;
    for (double d : density) s += d;
    return s * spacing;
  }
};

/// Probability density of one particle's coordinate (which = 0 or 1).
inline Marginal particle_marginal(const TwoParticleField& f, int which) {
  require(which == 0 || which == 1, "particle index must be 0 or 1");
  Marginal m;
  m.spacing = f.spacing();
  m.x.resize(f.n);
  m.density.assign(f.n, 0.0);
  for (int i = 0; i < f.n; ++i) {
    m.x[i] = f.coordinate(i);
    for (int j = 0; j < f.n; ++j) m.density[i] += std::norm(which == 0 ? f.at(i, j) : f.at(j, i));
    m.density[i] *= f.spacing();
  }
  return m;
}

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t * (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
}

// Bicubic Catmull-Rom of |psi|^2 at fractional grid indices; zero outside.
inline double density_at(const TwoParticleField& f, double fi, double fj) {
  const int i0 = int(std::floor(fi)), j0 = int(std::floor(fj));
  const double ti = fi - i0, tj = fj - j0;
  auto d = [&](int i, int j) { return (i < 0 || j < 0 || i >= f.n || j >= f.n) ? 0.0 : std::norm(f.at(i, j)); };
  double col[4];
  for (int a = 0; a < 4; ++a)
    col[a] = catmull_rom(d(i0 - 1 + a, j0 - 1), d(i0 - 1 + a, j0), d(i0 - 1 + a, j0 + 1), d(i0 - 1 + a, j0 + 2), tj);
  return std::max(0.0, catmull_rom(col[0], col[1], col[2], col[3], ti));
}

}  // namespace detail

/// Density of R = (m1 x1 + m2 x2) / M. For equal masses R takes the values
/// x_i/2 + x_j/2 exactly, so the marginal is a sum along anti-diagonals on an
/// R grid of spacing h/2. Otherwise |psi|^2 is interpolated (bicubic) along
/// lines of constant R.
inline Marginal com_marginal(const TwoParticleField& f) {
  const int n = f.n;
  const double h = f.spacing();
  Marginal m;
  m.spacing = h / 2;
  m.x.resize(2 * n - 1);
  m.density.assign(2 * n - 1, 0.0);
  for (int s = 0; s < 2 * n - 1; ++s) m.x[s] = -0.5 * f.extent + s * m.spacing;
  if (f.m1 == f.m2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.density[i + j] += std::norm(f.at(i, j));
    // dx1 dx2 = dR dr, and r advances by 2h along an anti-diagonal.
    for (auto& d : m.density) d *= 2 * h;
    return m;
  }
  const double M = f.total_mass();
  const double mu1 = f.m1 / M, mu2 = f.m2 / M;
  // x1 = R + mu2 r, x2 = R - mu1 r; sample r with spacing h.
  for (int s = 0; s < 2 * n - 1; ++s) {
    const double R = m.x[s];
    double acc = 0;
    for (int q = -2 * n; q <= 2 * n; ++q) {
      const double r = q * h;
      const double fi = (R + mu2 * r + 0.5 * f.extent) / h, fj = (R - mu1 * r + 0.5 * f.extent) / h;
      if (fi < -1 || fj < -1 || fi > n || fj > n) continue;
      acc += detail::density_at(f, fi, fj);
    }
    m.density[s] = acc * h;
  }
  return m;
}

/// Density of r = x1 - x2 on r_d = d h, d = -(n-1)..(n-1).
inline Marginal relative_marginal(const TwoParticleField& f) {
  const int n = f.n;
  const double h = f.spacing();
  Marginal m;
  m.spacing = h;
  m.x.resize(2 * n - 1);
  m.density.assign(2 * n - 1, 0.0);
  for (int d = 0; d < 2 * n - 1; ++d) m.x[d] = (d - (n - 1)) * h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.density[i - j + n - 1] += std::norm(f.at(i, j));
  for (auto& d : m.density) d *= h;
  return m;
}

/// L1 distance ∫ |p - q| of two marginals on the same grid.
inline double l1_distance(const Marginal& a, const Marginal& b) {
  require(a.density.size() == b.density.size() && a.spacing == b.spacing, "marginals must share one grid");
  double s = 0;
  for (std::size_t i = 0; i < a.density.size(); ++i) s += std::abs(a.density[i] - b.density[i]);
  return s * a.spacing;
}

/// Fringe visibility (Imax - Imin) / (Imax + Imin) within `half_window` of
/// the marginal's peak, where Imin is the smallest local minimum there.
/// Returns 0 when the window holds no local minimum (no fringes).
inline double visibility(const Marginal& m, double half_window = 1.0) {
  require(m.density.size() >= 3, "marginal too short for a visibility estimate");
  const auto [lo_it, hi_it] = std::minmax_element(m.density.begin(), m.density.end());
  if (!(*hi_it - *lo_it > 1e-12 * std::abs(*hi_it)))
    throw InvalidInput("marginal is flat: no fringes to analyse");
  const std::size_t peak = std::size_t(hi_it - m.density.begin());
  const double x0 = m.x[peak];
  double imax = *hi_it, imin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < m.density.size(); ++i) {
    if (std::abs(m.x[i] - x0) > half_window) continue;
    const double d = m.density[i];
    if (d <= m.density[i - 1] && d <= m.density[i + 1] && (d < m.density[i - 1] || d < m.density[i + 1]))
      imin = std::min(imin, d);
  }
  if (!std::isfinite(imin)) return 0.0;
  return std::clamp((imax - imin) / (imax + imin), 0.0, 1.0);
}

/// <p1 + p2> (kg m/s).
inline double total_momentum(const TwoParticleField& f, double hbar = 1.0) {
  const int n = f.n;
  ComplexFft fft({n, n});
  std::vector<cplx> w = f.values;
  fft.forward(w);
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = std::norm(w[std::size_t(i) * n + j]);
      num += (fft_wavenumber(i, n, f.spacing()) + fft_wavenumber(j, n, f.spacing())) * p;
      den += p;
    }
  return hbar * num / den;
}

}  // namespace gravdec
