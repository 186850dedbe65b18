#pragma once

// Reduction energy of a superposed pair of mass configurations,
//
//   Delta = G ∫∫ d^3r d^3r' [rho - rho'](r) [rho - rho'](r') / |r - r'|,
//
// and the associated reduction time. Three routes are provided: a voxel
// double sum, Monte Carlo over the support of the density difference, and
// the small-displacement closed forms for a displaced cube.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gravdec/cube_integral.hpp"
#include "gravdec/error.hpp"
#include "gravdec/mass_model.hpp"
#include "gravdec/random.hpp"
#include "gravdec/units.hpp"

namespace gravdec {

/// penrose: tau = hbar/Delta. diosi: tau = 2 hbar/Delta.
enum class Convention { penrose, diosi };
enum class DeltaMethod { mc, voxel, quadratic, surface };

inline const char* to_string(Convention c) { return c == Convention::penrose ? "penrose" : "diosi"; }
inline const char* to_string(DeltaMethod m) {
  switch (m) {
    case DeltaMethod::mc: return "mc";
    case DeltaMethod::voxel: return "voxel";
    case DeltaMethod::quadratic: return "quadratic";
    case DeltaMethod::surface: return "surface";
  }
  return "?";
}

struct DeltaResult {
  double delta = 0;                // J
  double delta_hbar_c_per_cm = 0;  // Delta / (hbar c / cm)
  double tau_d = 0;                // s; +inf when Delta = 0
  Convention convention = Convention::penrose;
  DeltaMethod method = DeltaMethod::voxel;
  double standard_error = 0;  // J, Monte Carlo only
  std::optional<std::string> warning;
};

inline double tau_from_delta(double delta, Convention convention, const PhysicalConstants& k = {}) {
  require(delta >= 0 && !std::isnan(delta), "tau_from_delta: Delta must be non-negative");
  if (delta == 0) return std::numeric_limits<double>::infinity();
  const double tau = k.hbar / delta;
  return convention == Convention::diosi ? 2 * tau : tau;
}

inline DeltaResult make_delta_result(double delta, DeltaMethod method, Convention convention,
                                     const PhysicalConstants& k, double standard_error = 0) {
  DeltaResult r;
  r.delta = delta;
  r.delta_hbar_c_per_cm = delta / k.hbar_c_per_cm();
  r.tau_d = tau_from_delta(std::max(delta, 0.0), convention, k);
  r.convention = convention;
  r.method = method;
  r.standard_error = standard_error;
  return r;
}

/// ∫∫_{[0,1]^3 x [0,1]^3} dV dV' / |r - r'|: the coincident-cell kernel
/// average for a unit cube.
inline constexpr double kCubeSelfCoefficient = 1.8823126444;

struct VoxelOptions {
  std::size_t cells_per_side = 64;
};

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

/// Voxel double sum over cells carrying a nonzero density difference:
/// off-diagonal kernel 1/|r_i - r_j| between cell centres, diagonal
/// kCubeSelfCoefficient / a.
inline DeltaResult delta_voxel(const SuperposedPair& pair, const VoxelOptions& opt,
                               const PhysicalConstants& k = {}, Convention conv = Convention::penrose) {
  const VoxelPair vp = voxelize_pair(pair, opt.cells_per_side);
  const double a = vp.grid.cell_size;
  const double cell_volume = a * a * a;
  const auto [nx, ny, nz] = vp.grid.dims;

  struct Cell {
    int i, j, k;
    double q;  // kg
  };
  std::vector<Cell> cells;
  for (std::size_t kk = 0; kk < nz; ++kk)
    for (std::size_t jj = 0; jj < ny; ++jj)
      for (std::size_t ii = 0; ii < nx; ++ii) {
        const std::size_t idx = vp.a.index(ii, jj, kk);
        const double diff = vp.a.density[idx] - vp.b.density[idx];
        if (diff != 0.0) cells.push_back({int(ii), int(jj), int(kk), diff * cell_volume});
      }
  if (cells.empty()) return make_delta_result(0.0, DeltaMethod::voxel, conv, k);

  // 1/|index offset| lookup when it fits; direct evaluation otherwise.
  const std::size_t table_size = nx * ny * nz;
  std::vector<double> inv_dist;
  if (table_size <= (std::size_t{1} << 24)) {
    inv_dist.resize(table_size);
    for (std::size_t dk = 0; dk < nz; ++dk)
      for (std::size_t dj = 0; dj < ny; ++dj)
        for (std::size_t di = 0; di < nx; ++di) {
          const double r2 = double(di * di + dj * dj + dk * dk);
          inv_dist[di + nx * (dj + ny * dk)] = r2 > 0 ? 1.0 / std::sqrt(r2) : 0.0;
        }
  }
  auto kernel = [&](const Cell& p, const Cell& q) {
    const std::size_t di = std::abs(p.i - q.i), dj = std::abs(p.j - q.j), dk = std::abs(p.k - q.k);
    if (!inv_dist.empty()) return inv_dist[di + nx * (dj + ny * dk)];
    return 1.0 / std::sqrt(double(di * di + dj * dj + dk * dk));
  };

  double diagonal = 0, off_diagonal = 0;
  for (std::size_t p = 0; p < cells.size(); ++p) {
    diagonal += cells[p].q * cells[p].q;
    double row = 0;
    for (std::size_t q = p + 1; q < cells.size(); ++q) row += cells[q].q * kernel(cells[p], cells[q]);
    off_diagonal += cells[p].q * row;
  }
  const double sum = (kCubeSelfCoefficient * diagonal + 2 * off_diagonal) / a;
  return make_delta_result(k.G * sum, DeltaMethod::voxel, conv, k);
}

/// Piece of a disjoint cover of supp(rho - rho'). `density` is the constant
/// difference on the piece when known, otherwise it is evaluated pointwise.
struct SupportPiece {
  Aabb box;
  std::optional<double> density;
};

/// Disjoint boxes covering the support of rho_a - rho_b. Box pairs are cut
/// exactly along the union of their faces; voxel pairs on one grid give
/// their nonzero cells; anything else falls back to the bounding hull.
inline std::vector<SupportPiece> difference_support(const SuperposedPair& pair) {
  std::vector<SupportPiece> pieces;
  if (pair.a.is_box() && pair.b.is_box()) {
    const Aabb A = pair.a.bounds(), B = pair.b.bounds();
    std::array<std::vector<double>, 3> cuts;
    for (int ax = 0; ax < 3; ++ax) {
      cuts[ax] = {A.lo[ax], A.hi[ax], B.lo[ax], B.hi[ax]};
      std::sort(cuts[ax].begin(), cuts[ax].end());
      cuts[ax].erase(std::unique(cuts[ax].begin(), cuts[ax].end()), cuts[ax].end());
    }
    for (std::size_t i = 0; i + 1 < cuts[0].size(); ++i)
      for (std::size_t j = 0; j + 1 < cuts[1].size(); ++j)
        for (std::size_t l = 0; l + 1 < cuts[2].size(); ++l) {
          const Aabb piece{{cuts[0][i], cuts[1][j], cuts[2][l]}, {cuts[0][i + 1], cuts[1][j + 1], cuts[2][l + 1]}};
          auto inside = [&](const Aabb& box) {
            for (int ax = 0; ax < 3; ++ax)
              if (piece.lo[ax] < box.lo[ax] || piece.hi[ax] > box.hi[ax]) return false;
            return true;
          };
          const double diff = (inside(A) ? pair.a.density0 : 0.0) - (inside(B) ? pair.b.density0 : 0.0);
          if (diff != 0.0 && piece.volume() > 0) pieces.push_back({piece, diff});
        }
    return pieces;
  }
  if (pair.a.is_voxel() && pair.b.is_voxel()) {
    const VoxelPair vp = voxelize_pair(pair, 1);
    const double a = vp.grid.cell_size;
    for (std::size_t kk = 0; kk < vp.grid.dims[2]; ++kk)
      for (std::size_t jj = 0; jj < vp.grid.dims[1]; ++jj)
        for (std::size_t ii = 0; ii < vp.grid.dims[0]; ++ii) {
          const std::size_t idx = vp.a.index(ii, jj, kk);
          const double diff = vp.a.density[idx] - vp.b.density[idx];
          if (diff == 0.0) continue;
          const Vec3 lo = vp.grid.origin + Vec3{a * double(ii), a * double(jj), a * double(kk)};
          pieces.push_back({{lo, lo + Vec3{a, a, a}}, diff});
        }
    return pieces;
  }
  pieces.push_back({hull(pair.a.bounds(), pair.b.bounds()), std::nullopt});
  return pieces;
}

/// Monte Carlo estimate: r and r' drawn independently and uniformly over
/// the support cover (total volume V), Delta = G V^2 E[w(r) w(r') / |r - r'|].
/// Samples are processed in fixed blocks with one substream per block, so the
/// estimate depends only on (seed, samples).
inline DeltaResult delta_mc(const SuperposedPair& pair, const MonteCarloOptions& opt,
                            const PhysicalConstants& k = {}, Convention conv = Convention::penrose) {
  require(opt.samples >= 1000, "Monte Carlo needs at least 1000 samples");
  const std::vector<SupportPiece> pieces = difference_support(pair);
  std::vector<double> cumulative;
  double volume = 0;
  for (const auto& p : pieces) cumulative.push_back(volume += p.box.volume());
  if (pieces.empty() || !(volume > 0)) return make_delta_result(0.0, DeltaMethod::mc, conv, k);

  auto draw = [&](std::mt19937_64& rng, std::uniform_real_distribution<double>& u) {
    const double pick = u(rng) * volume;
    std::size_t idx = std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    idx = std::min(idx, pieces.size() - 1);
    const Aabb& b = pieces[idx].box;
    const Vec3 p{b.lo.x + u(rng) * (b.hi.x - b.lo.x), b.lo.y + u(rng) * (b.hi.y - b.lo.y),
                 b.lo.z + u(rng) * (b.hi.z - b.lo.z)};
    const double w = pieces[idx].density ? *pieces[idx].density : pair.a.density_at(p) - pair.b.density_at(p);
    return std::pair{p, w};
  };

  constexpr std::size_t kBlock = 4096;
  double mean = 0, m2 = 0;
  std::size_t count = 0;
  for (std::size_t block = 0; block * kBlock < opt.samples; ++block) {
    auto rng = substream(opt.seed, block);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = std::min(kBlock, opt.samples - block * kBlock);
    for (std::size_t s = 0; s < n; ++s) {
      const auto [p, wp] = draw(rng, u);
      const auto [q, wq] = draw(rng, u);
      const double dist = (p - q).norm();
      const double x = (wp == 0 || wq == 0 || dist == 0) ? 0.0 : wp * wq / dist;
      ++count;
      const double d = x - mean;
      mean += d / double(count);
      m2 += d * (x - mean);
    }
  }
  const double scale = k.G * volume * volume;
  const double var = count > 1 ? m2 / double(count - 1) : 0.0;
  DeltaResult r = make_delta_result(scale * mean, DeltaMethod::mc, conv, k, scale * std::sqrt(var / double(count)));
  return r;
}

using FullMethod = std::variant<MonteCarloOptions, VoxelOptions>;

inline DeltaResult delta_full(const SuperposedPair& pair, const FullMethod& method, const PhysicalConstants& k = {},
                              Convention conv = Convention::penrose) {
  if (const auto* mc = std::get_if<MonteCarloOptions>(&method)) return delta_mc(pair, *mc, k, conv);
  return delta_voxel(pair, std::get<VoxelOptions>(method), k, conv);
}

/// Leading order in d: Delta = (4π/3) G d^2 S^3 rho0^2.
inline DeltaResult delta_cube_quadratic(double side, double rho0, double d, const PhysicalConstants& k = {},
                                        Convention conv = Convention::penrose) {
  require(side > 0 && std::isfinite(side), "cube side must be positive");
  require(rho0 > 0 && std::isfinite(rho0), "cube density must be positive");
  require(std::isfinite(d), "displacement must be finite");
  const double delta = 4.0 * std::numbers::pi / 3.0 * k.G * d * d * side * side * side * rho0 * rho0;
  DeltaResult r = make_delta_result(delta, DeltaMethod::quadratic, conv, k);
  if (std::abs(d) / side > 0.1)
    r.warning = "|d|/S = " + std::to_string(std::abs(d) / side) + " exceeds 0.1; leading-order expansion may be inaccurate";
  return r;
}

/// Parameters of a pair produced by build_displaced_cube (or any rigid
/// translation of one along a single axis).
struct DisplacedCube {
  double side;
  double rho0;
  double d;
  Axis axis;
};

inline DisplacedCube recognize_displaced_cube(const SuperposedPair& pair) {
  require(pair.a.is_box() && pair.b.is_box(), "pair is not a displaced cube: members must be boxes");
  const auto& sa = std::get<BoxShape>(pair.a.shape).side;
  const auto& sb = std::get<BoxShape>(pair.b.shape).side;
  require(sa == sb && sa.x == sa.y && sa.y == sa.z, "pair is not a displaced cube: sides differ");
  require(pair.a.density0 == pair.b.density0, "pair is not a displaced cube: densities differ");
  const Vec3 shift = pair.b.origin - pair.a.origin;
  int moved = -1;
  for (int ax = 0; ax < 3; ++ax) {
    if (shift[ax] == 0.0) continue;
    require(moved < 0, "pair is not a displaced cube: displacement is not along one axis");
    moved = ax;
  }
  const int ax = moved < 0 ? 2 : moved;
  return {sa.x, pair.a.density0, std::abs(shift[ax]), static_cast<Axis>(ax)};
}

/// Surface-layer form: Delta = G d^2 rho0^2 I1 with I1 = 2 S^3 I, I from
/// the reduced double integral.
inline DeltaResult delta_surface_expansion(const SuperposedPair& pair, const PhysicalConstants& k = {},
                                           Convention conv = Convention::penrose) {
  const DisplacedCube c = recognize_displaced_cube(pair);
  const double I1 = 2.0 * c.side * c.side * c.side * integral_I(IntegralForm::reduced_double);
  DeltaResult r = make_delta_result(k.G * c.d * c.d * c.rho0 * c.rho0 * I1, DeltaMethod::surface, conv, k);
  if (c.d / c.side > 0.1)
    r.warning = "|d|/S exceeds 0.1; leading-order expansion may be inaccurate";
  return r;
}

/// A uniform cube of the given mass displaced along z by d.
struct CubePreset {
  double side = 0;  // m
  double d = 0;     // m
  double mass = 0;  // kg
  double density() const { return mass / (side * side * side); }
  SuperposedPair pair() const { return build_displaced_cube(side, density(), d, Axis::z); }
};

/// The superposed-mirror numbers: S = 1e-3 cm, d = 1e-11 cm, M = 5e-12 kg.
inline CubePreset mirror_preset() {
  return {in_si(1e-3, Unit::cm), in_si(1e-11, Unit::cm), in_si(5e-12, Unit::kg)};
}

}  // namespace gravdec
