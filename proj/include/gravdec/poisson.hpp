#pragma once

// Isolated (free-space) Newtonian potential, nabla^2 phi = 4 pi G rho,
// phi -> 0 at infinity.
//
// Cartesian grids: zero-padded convolution with the 1/r Green's function on
// a doubled grid, so there are no periodic images. Radial grids: exact shell
// integrals phi(r) = -G [ M(r)/r + ∫_r^∞ 4π r' rho(r') dr' ].

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "gravdec/error.hpp"
#include "gravdec/fft.hpp"

namespace gravdec {

/// Average of 1/|r| over a unit cell centred on the origin,
/// ∫_{[-1/2,1/2]^3} d^3u / |u|. Coincident-cell kernel value (times 1/h).
inline constexpr double kCellCentreInverseDistance = 2.3800773640;

class FreeSpacePoisson {
 public:
  FreeSpacePoisson(std::array<int, 3> dims, double cell)
      : dims_(dims), cell_(cell), padded_{2 * dims[0], 2 * dims[1], 2 * dims[2]},
        fft_({padded_[0], padded_[1], padded_[2]}) {
    require(dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1, "Poisson grid dims must be positive");
    require(cell > 0, "Poisson cell size must be positive");
    green_.assign(fft_.size(), cplx{});
    for (int i = 0; i < padded_[0]; ++i)
      for (int j = 0; j < padded_[1]; ++j)
        for (int k = 0; k < padded_[2]; ++k) {
          const double di = wrap(i, padded_[0]), dj = wrap(j, padded_[1]), dk = wrap(k, padded_[2]);
          const double r = std::sqrt(di * di + dj * dj + dk * dk);
          green_[padded_index(i, j, k)] = (r == 0 ? kCellCentreInverseDistance : 1.0 / r) / cell_;
        }
    fft_.forward(green_);
  }

  const std::array<int, 3>& dims() const { return dims_; }
  double cell() const { return cell_; }

  /// Kernel value (1/length) between cells offset by (di, dj, dk).
  double kernel(int di, int dj, int dk) const {
    const double r = std::sqrt(double(di * di + dj * dj + dk * dk));
    return (r == 0 ? kCellCentreInverseDistance : 1.0 / r) / cell_;
  }

  /// Potential per unit test mass (J/kg) at cell centres, for `density`
  /// (kg m^-3) given row-major with the last axis fastest.
  std::vector<double> solve(std::span<const double> density, double G) const {
    const std::size_t n = std::size_t(dims_[0]) * dims_[1] * dims_[2];
    require(density.size() == n, "density array does not match Poisson grid");
    std::vector<cplx> work(fft_.size(), cplx{});
    const double cell_volume = cell_ * cell_ * cell_;
    for (int i = 0; i < dims_[0]; ++i)
      for (int j = 0; j < dims_[1]; ++j)
        for (int k = 0; k < dims_[2]; ++k) {
          const double rho = density[(std::size_t(i) * dims_[1] + j) * dims_[2] + k];
          require(rho >= 0 && std::isfinite(rho), "Poisson source density must be non-negative");
          work[padded_index(i, j, k)] = rho * cell_volume;
        }
    fft_.forward(work);
    for (std::size_t q = 0; q < work.size(); ++q) work[q] *= green_[q];
    fft_.backward(work);
    const double scale = -G / double(fft_.size());
    std::vector<double> phi(n);
    for (int i = 0; i < dims_[0]; ++i)
      for (int j = 0; j < dims_[1]; ++j)
        for (int k = 0; k < dims_[2]; ++k)
          phi[(std::size_t(i) * dims_[1] + j) * dims_[2] + k] = scale * work[padded_index(i, j, k)].real();
    return phi;
  }

 private:
  static double wrap(int i, int n) { return double(i <= n / 2 ? i : i - n); }
  std::size_t padded_index(int i, int j, int k) const {
    return (std::size_t(i) * padded_[1] + j) * padded_[2] + k;
  }

  std::array<int, 3> dims_;
  double cell_;
  std::array<int, 3> padded_;
  ComplexFft fft_;
  std::vector<cplx> green_;
};

/// One-shot isolated solve on a cubic-cell grid; see FreeSpacePoisson::solve.
inline std::vector<double> solve_poisson(std::span<const double> density, std::array<int, 3> dims, double cell,
                                         double G) {
  return FreeSpacePoisson(dims, cell).solve(density, G);
}

/// Free-space potential of a spherically symmetric source on the radial grid
/// r_i = (i+1) h, i = 0..n-1 (the points strictly inside (0, (n+1) h)).
/// `shell_density` holds 4π r^2 rho(r), i.e. dM/dr; it must vanish at the
/// outer boundary. Cumulative integrals use the fourth-order rule
/// ∫_{r_j}^{r_j+1} f ≈ h/24 (-f_{j-1} + 13 f_j + 13 f_{j+1} - f_{j+2}), with
/// f extended evenly about r = 0 and beyond the boundary.
inline std::vector<double> radial_potential(std::span<const double> shell_density, double h, double G) {
  const std::size_t n = shell_density.size();
  require(n >= 2 && h > 0, "radial grid too small");
  // f[j] = f(r_j) for j = 0..n+1, r_j = j h, with f(0) = f(L) = 0.
  std::vector<double> f(n + 2, 0.0), g(n + 2, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    require(shell_density[i] >= 0 && std::isfinite(shell_density[i]), "radial source must be non-negative");
    f[i + 1] = shell_density[i];
    g[i + 1] = shell_density[i] / (double(i + 1) * h);
  }
  auto at = [&](const std::vector<double>& v, long j, double parity) {
    if (j < 0) return parity * v[std::size_t(-j)];
    if (j > long(n + 1)) return 0.0;
    return v[std::size_t(j)];
  };
  auto segment = [&](const std::vector<double>& v, long j, double parity) {
    return h / 24.0 * (-at(v, j - 1, parity) + 13 * at(v, j, parity) + 13 * at(v, j + 1, parity) - at(v, j + 2, parity));
  };
  // Enclosed mass M(r_j) and outer integral Q(r_j) = ∫_{r_j}^L f/r.
  std::vector<double> enclosed(n + 2, 0.0), outer(n + 2, 0.0);
  for (long j = 0; j <= long(n); ++j) enclosed[j + 1] = enclosed[j] + segment(f, j, 1.0);
  for (long j = long(n); j >= 0; --j) outer[j] = outer[j + 1] + segment(g, j, -1.0);
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = double(i + 1) * h;
    phi[i] = -G * (enclosed[i + 1] / r + outer[i + 1]);
  }
  return phi;
}

}  // namespace gravdec
