#pragma once

// Rigid homogeneous mass distributions (box, sphere, voxel grid) and the
// superposed pairs that feed the reduction-energy integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gravdec/error.hpp"

namespace gravdec {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

enum class Axis { x = 0, y = 1, z = 2 };

/// Axis-aligned box [lo, hi).
struct Aabb {
  Vec3 lo, hi;

  double volume() const { return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z); }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y && p.z >= lo.z && p.z < hi.z;
  }
};

inline Aabb hull(const Aabb& a, const Aabb& b) {
  return {{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y), std::min(a.lo.z, b.lo.z)},
          {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y), std::max(a.hi.z, b.hi.z)}};
}

/// Length of [a0,a1) ∩ [b0,b1).
inline double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

struct BoxShape {
  Vec3 side;  // m
};

struct SphereShape {
  double radius;  // m
};

/// Cell (i,j,k) spans origin + a*[i,i+1) x a*[j,j+1) x a*[k,k+1).
/// Flat index is i + nx*(j + ny*k).
struct VoxelGrid {
  double cell_size = 0;
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::vector<double> density;  // kg m^-3

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return density[index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return density[index(i, j, k)]; }
};

using Shape = std::variant<BoxShape, SphereShape, VoxelGrid>;

/// A rigid body of homogeneous density (analytic shapes) or a tabulated
/// density (voxel grid). For a box `origin` is its low corner, for a sphere
/// its centre, for a voxel grid the low corner of cell (0,0,0).
struct MassDistribution {
  Shape shape;
  Vec3 origin;
  double density0 = 0;  // kg m^-3, analytic shapes only

  static MassDistribution box(Vec3 side, double rho0, Vec3 origin = {}) {
    MassDistribution d{BoxShape{side}, origin, rho0};
    d.validate();
    return d;
  }
  static MassDistribution sphere(double radius, double rho0, Vec3 centre = {}) {
    MassDistribution d{SphereShape{radius}, centre, rho0};
    d.validate();
    return d;
  }
  static MassDistribution voxels(VoxelGrid grid, Vec3 origin) {
    MassDistribution d{std::move(grid), origin, 0.0};
    d.validate();
    return d;
  }

  bool is_box() const { return std::holds_alternative<BoxShape>(shape); }
  bool is_sphere() const { return std::holds_alternative<SphereShape>(shape); }
  bool is_voxel() const { return std::holds_alternative<VoxelGrid>(shape); }

  void validate() const {
    if (const auto* b = std::get_if<BoxShape>(&shape)) {
      require(b->side.x > 0 && b->side.y > 0 && b->side.z > 0, "box sides must be positive");
      require(density0 > 0 && std::isfinite(density0), "density must be positive");
    } else if (const auto* s = std::get_if<SphereShape>(&shape)) {
      require(s->radius > 0, "sphere radius must be positive");
      require(density0 > 0 && std::isfinite(density0), "density must be positive");
    } else {
      const auto& g = std::get<VoxelGrid>(shape);
      require(g.cell_size > 0, "voxel cell size must be positive");
      require(g.dims[0] >= 1 && g.dims[1] >= 1 && g.dims[2] >= 1, "voxel dims must be >= 1");
      require(g.density.size() == g.size(), "voxel density array has wrong size");
      for (double v : g.density) require(v >= 0 && std::isfinite(v), "voxel densities must be >= 0");
    }
    const double m = total_mass();
    require(m > 0 && std::isfinite(m), "total mass must be finite and positive");
  }

  Aabb bounds() const {
    if (const auto* b = std::get_if<BoxShape>(&shape)) return {origin, origin + b->side};
    if (const auto* s = std::get_if<SphereShape>(&shape)) {
      const Vec3 r{s->radius, s->radius, s->radius};
      return {origin - r, origin + r};
    }
    const auto& g = std::get<VoxelGrid>(shape);
    const double a = g.cell_size;
    return {origin, origin + Vec3{a * double(g.dims[0]), a * double(g.dims[1]), a * double(g.dims[2])}};
  }

  double total_mass() const {
    if (const auto* b = std::get_if<BoxShape>(&shape)) return density0 * b->side.x * b->side.y * b->side.z;
    if (const auto* s = std::get_if<SphereShape>(&shape))
      return density0 * 4.0 / 3.0 * std::numbers::pi * s->radius * s->radius * s->radius;
    const auto& g = std::get<VoxelGrid>(shape);
    double sum = 0;
    for (double v : g.density) sum += v;
    return sum * g.cell_size * g.cell_size * g.cell_size;
  }

  double density_at(const Vec3& p) const {
    if (std::holds_alternative<BoxShape>(shape)) return bounds().contains(p) ? density0 : 0.0;
    if (const auto* s = std::get_if<SphereShape>(&shape))
      return (p - origin).norm() < s->radius ? density0 : 0.0;
    const auto& g = std::get<VoxelGrid>(shape);
    const Vec3 q = p - origin;
    std::array<std::size_t, 3> idx{};
    for (int ax = 0; ax < 3; ++ax) {
      const double f = std::floor(q[ax] / g.cell_size);
      if (f < 0 || f >= double(g.dims[ax])) return 0.0;
      idx[ax] = static_cast<std::size_t>(f);
    }
    return g.at(idx[0], idx[1], idx[2]);
  }

  /// Rigid translation: only the origin moves.
  MassDistribution translated(const Vec3& by) const {
    MassDistribution d = *this;
    d.origin = origin + by;
    return d;
  }
};

/// Two placements of the same body.
struct SuperposedPair {
  MassDistribution a;
  MassDistribution b;

  SuperposedPair(MassDistribution first, MassDistribution second)
      : a(std::move(first)), b(std::move(second)) {
    a.validate();
    b.validate();
    const double ma = a.total_mass(), mb = b.total_mass();
    require(std::abs(ma - mb) <= 1e-12 * std::max(ma, mb),
            "superposed configurations must carry equal total mass");
  }

  SuperposedPair swapped() const { return {b, a}; }
  SuperposedPair translated(const Vec3& by) const { return {a.translated(by), b.translated(by)}; }
};

/// Cube of side S at [0,S)^3 and the same cube shifted by -d along `axis`,
/// i.e. occupying [-d, S-d) on that axis.
inline SuperposedPair build_displaced_cube(double side, double rho0, double d, Axis axis) {
  require(side > 0 && std::isfinite(side), "cube side must be positive");
  require(rho0 > 0 && std::isfinite(rho0), "cube density must be positive");
  require(std::isfinite(d), "displacement must be finite");
  Vec3 shift{};
  shift[static_cast<int>(axis)] = -d;
  const Vec3 s{side, side, side};
  return {MassDistribution::box(s, rho0), MassDistribution::box(s, rho0, shift)};
}

/// Uniform grid specification used when voxelizing.
struct GridSpec {
  Vec3 origin;
  double cell_size = 0;
  std::array<std::size_t, 3> dims{0, 0, 0};
};

namespace detail {

inline double box_cell_fraction(const Aabb& box, const Vec3& lo, double a) {
  double f = 1.0;
  for (int ax = 0; ax < 3; ++ax) {
    f *= interval_overlap(box.lo[ax], box.hi[ax], lo[ax], lo[ax] + a) / a;
    if (f == 0.0) break;
  }
  return f;
}

// Covered fraction of a cell by a sphere: 0/1 for cells entirely out/in,
// otherwise midpoint subsampling with `sub`^3 points.
inline double sphere_cell_fraction(const Vec3& centre, double radius, const Vec3& lo, double a, int sub) {
  double near2 = 0, far2 = 0;
  for (int ax = 0; ax < 3; ++ax) {
    const double c0 = lo[ax] - centre[ax], c1 = c0 + a;
    const double n = (c0 > 0) ? c0 : (c1 < 0 ? c1 : 0.0);
    const double f = std::max(std::abs(c0), std::abs(c1));
    near2 += n * n;
    far2 += f * f;
  }
  const double r2 = radius * radius;
  if (near2 >= r2) return 0.0;
  if (far2 <= r2) return 1.0;
  int inside = 0;
  const double step = a / sub;
  for (int i = 0; i < sub; ++i)
    for (int j = 0; j < sub; ++j)
      for (int k = 0; k < sub; ++k) {
        const Vec3 p{lo.x + (i + 0.5) * step, lo.y + (j + 0.5) * step, lo.z + (k + 0.5) * step};
        if ((p - centre).norm() < radius) ++inside;
      }
  return double(inside) / double(sub * sub * sub);
}

}  // namespace detail

/// Rasterize an analytic shape onto `grid`. Box cells get exact covered
/// fractions; sphere boundary cells are subsampled 4x4x4.
inline VoxelGrid rasterize(const MassDistribution& dist, const GridSpec& grid) {
  require(!dist.is_voxel(), "rasterize expects an analytic shape");
  require(grid.cell_size > 0, "grid cell size must be positive");
  VoxelGrid out{grid.cell_size, grid.dims, std::vector<double>(grid.dims[0] * grid.dims[1] * grid.dims[2], 0.0)};
  const double a = grid.cell_size;
  const Aabb bb = dist.bounds();
  // Only visit the cells the shape's bounding box touches.
  std::array<std::size_t, 3> first{}, last{};
  for (int ax = 0; ax < 3; ++ax) {
    const double f0 = std::floor((bb.lo[ax] - grid.origin[ax]) / a) - 1;
    const double f1 = std::ceil((bb.hi[ax] - grid.origin[ax]) / a) + 1;
    first[ax] = static_cast<std::size_t>(std::clamp(f0, 0.0, double(grid.dims[ax])));
    last[ax] = static_cast<std::size_t>(std::clamp(f1, 0.0, double(grid.dims[ax])));
  }
  const auto* sphere = std::get_if<SphereShape>(&dist.shape);
  for (std::size_t k = first[2]; k < last[2]; ++k)
    for (std::size_t j = first[1]; j < last[1]; ++j)
      for (std::size_t i = first[0]; i < last[0]; ++i) {
        const Vec3 lo{grid.origin.x + a * double(i), grid.origin.y + a * double(j), grid.origin.z + a * double(k)};
        const double f = sphere ? detail::sphere_cell_fraction(dist.origin, sphere->radius, lo, a, 4)
                                : detail::box_cell_fraction(bb, lo, a);
        out.at(i, j, k) = f * dist.density0;
      }
  return out;
}

/// Largest linear extent of an analytic shape (box side or sphere diameter).
inline double characteristic_length(const MassDistribution& dist) {
  if (const auto* b = std::get_if<BoxShape>(&dist.shape)) return std::max({b->side.x, b->side.y, b->side.z});
  if (const auto* s = std::get_if<SphereShape>(&dist.shape)) return 2 * s->radius;
  throw InvalidInput("characteristic length is defined for analytic shapes only");
}

/// Voxelize an analytic shape with `n` cells across its largest extent.
inline MassDistribution voxelize(const MassDistribution& dist, std::size_t n) {
  require(n >= 1, "voxelize needs at least one cell per side");
  require(!dist.is_voxel(), "voxelize expects an analytic shape");
  const double a = characteristic_length(dist) / double(n);
  const Aabb bb = dist.bounds();
  GridSpec g{bb.lo, a, {}};
  for (int ax = 0; ax < 3; ++ax)
    g.dims[ax] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((bb.hi[ax] - bb.lo[ax]) / a - 1e-9)));
  return MassDistribution::voxels(rasterize(dist, g), g.origin);
}

/// Both members of a pair rasterized on one common grid.
struct VoxelPair {
  GridSpec grid;
  VoxelGrid a;
  VoxelGrid b;
};

/// Common grid for a pair: cell = characteristic length / n, anchored at the
/// componentwise minimum of the two bounding boxes (symmetric in a and b).
inline VoxelPair voxelize_pair(const SuperposedPair& pair, std::size_t n) {
  require(n >= 1, "voxelize needs at least one cell per side");
  if (pair.a.is_voxel() || pair.b.is_voxel()) {
    require(pair.a.is_voxel() && pair.b.is_voxel(), "cannot mix voxel and analytic members");
    const auto& ga = std::get<VoxelGrid>(pair.a.shape);
    const auto& gb = std::get<VoxelGrid>(pair.b.shape);
    require(ga.dims == gb.dims && ga.cell_size == gb.cell_size && pair.a.origin == pair.b.origin,
            "voxel pair members must share one grid");
    return {{pair.a.origin, ga.cell_size, ga.dims}, ga, gb};
  }
  const double a = std::max(characteristic_length(pair.a), characteristic_length(pair.b)) / double(n);
  const Aabb bb = hull(pair.a.bounds(), pair.b.bounds());
  GridSpec g{bb.lo, a, {}};
  for (int ax = 0; ax < 3; ++ax)
    g.dims[ax] = static_cast<std::size_t>(std::ceil((bb.hi[ax] - bb.lo[ax]) / a)) + 1;
  return {g, rasterize(pair.a, g), rasterize(pair.b, g)};
}

/// Writes `<base>.bin` (little-endian float64 densities, x fastest) and
/// `<base>.hdr` (plain text: dims, cell_size, origin).
inline void write_voxel_grid(const std::string& base, const VoxelGrid& g, const Vec3& origin) {
  std::ofstream hdr(base + ".hdr");
  require(bool(hdr), "cannot open " + base + ".hdr");
  hdr << std::setprecision(17);
  hdr << "dims " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n';
  hdr << "cell_size " << g.cell_size << '\n';
  hdr << "origin " << origin.x << ' ' << origin.y << ' ' << origin.z << '\n';
  hdr << "dtype float64-le\norder x-fastest\n";
  std::ofstream bin(base + ".bin", std::ios::binary);
  require(bool(bin), "cannot open " + base + ".bin");
  bin.write(reinterpret_cast<const char*>(g.density.data()), std::streamsize(g.density.size() * sizeof(double)));
}

inline MassDistribution read_voxel_grid(const std::string& base) {
  std::ifstream hdr(base + ".hdr");
  require(bool(hdr), "cannot open " + base + ".hdr");
  VoxelGrid g;
  Vec3 origin;
  std::string key;
  while (hdr >> key) {
    if (key == "dims") hdr >> g.dims[0] >> g.dims[1] >> g.dims[2];
    else if (key == "cell_size") hdr >> g.cell_size;
    else if (key == "origin") hdr >> origin.x >> origin.y >> origin.z;
    else std::getline(hdr, key);
  }
  g.density.resize(g.size());
  std::ifstream bin(base + ".bin", std::ios::binary);
  require(bool(bin), "cannot open " + base + ".bin");
  bin.read(reinterpret_cast<char*>(g.density.data()), std::streamsize(g.density.size() * sizeof(double)));
  require(bin.gcount() == std::streamsize(g.density.size() * sizeof(double)), "truncated voxel file " + base);
  return MassDistribution::voxels(std::move(g), origin);
}

}  // namespace gravdec
