#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "panocc/types.hpp"

namespace panocc {

/// Axis-aligned voxel lattice. Voxel (i, j, k) spans
/// [x0 + i dx, x0 + (i+1) dx) and likewise in y and z.
struct CartesianGridSpec {
  std::size_t nx = 1, ny = 1, nz = 1;
  double x0 = 0.0, y0 = 0.0, z0 = 0.0;
  double dx = 1.0, dy = 1.0, dz = 1.0;

  GridDims dims() const { return {nx, ny, nz}; }
  std::size_t count() const { return nx * ny * nz; }
  Vec3 centroid(std::size_t i, std::size_t j, std::size_t k) const;
  void validate() const;

  /// Grid at voxel stride `level`: counts divided by level (rounded up) and
  /// edges multiplied by level. Coarse voxel (i, j, k) is centered on fine
  /// voxel (level i, level j, level k), the sample a centered stride-level
  /// convolution produces, so the minimum corner moves by (1 - level) / 2
  /// fine edges.
  CartesianGridSpec at_level(int level) const;

  /// 64x64x8 at 0.4 m, centered on the origin.
  static CartesianGridSpec quadocc();
  /// 128x128x16 over the same 25.6 x 25.6 x 3.2 m volume (0.2 m voxels).
  static CartesianGridSpec h3o();

  friend bool operator==(const CartesianGridSpec&, const CartesianGridSpec&) = default;
};

enum class RadialSpacing { Linear, Log };

const char* to_string(RadialSpacing spacing);
RadialSpacing radial_spacing_from_string(const std::string& name);

/// Cylindrical grid about the z axis: nr radial shells over [r0, r1], nphi
/// equiangular azimuth sectors over [-pi, pi), nz layers of height dz from z0.
/// Cell (p, q, k) has flat index (k * nphi + q) * nr + p.
struct PolarGridSpec {
  std::size_t nr = 1, nphi = 1, nz = 1;
  double r0 = 0.0, r1 = 1.0;
  double z0 = 0.0, dz = 1.0;
  RadialSpacing spacing = RadialSpacing::Linear;

  GridDims dims() const { return {nr, nphi, nz}; }
  std::size_t count() const { return nr * nphi * nz; }
  void validate() const;

  double radial_edge(std::size_t p) const;
  double radius(std::size_t p) const;
  double azimuth(std::size_t q) const;
  double height(std::size_t k) const { return z0 + (static_cast<double>(k) + 0.5) * dz; }
  Vec3 centroid(std::size_t p, std::size_t q, std::size_t k) const;

  /// Shell/sector/layer counts divided by level (rounded up). Radial and
  /// vertical steps grow by level; azimuth sectors always cover the full turn.
  PolarGridSpec at_level(int level) const;

  /// Polar companion of a Cartesian grid: nr = nx/2, nphi = 2 nx, the same
  /// layers, r0 = 0 and r1 reaching the farthest grid side along x or y. For
  /// a centered square grid the shells are two voxels thick and the corner
  /// columns clamp to the outer shell.
  static PolarGridSpec default_for(const CartesianGridSpec& ca);

  friend bool operator==(const PolarGridSpec&, const PolarGridSpec&) = default;
};

std::vector<Vec3> cartesian_centroids(const CartesianGridSpec& spec);
std::vector<Vec3> polar_centroids(const PolarGridSpec& spec);

/// Analytic cell of a point. Points outside the radial or vertical extent
/// clamp to the boundary cell; a point exactly on a face goes to the lower
/// index; r == 0 maps to azimuth sector 0.
std::array<std::size_t, 3> polar_cell_of(const PolarGridSpec& spec, const Vec3& p);
std::size_t polar_index_of(const PolarGridSpec& spec, const Vec3& p);

/// Nearest polar cell of every Cartesian voxel at a given stride level.
struct CrossIndexTable {
  int level = 1;
  std::size_t polar_count = 0;
  std::vector<std::uint32_t> indices;  // one per Cartesian voxel
};

inline bool is_supported_level(int level) { return level == 1 || level == 2 || level == 4; }

/// Bins every level-`level` Cartesian centroid into the level-`level` polar
/// grid. `level` must be 1, 2 or 4.
CrossIndexTable build_cross_indices(const CartesianGridSpec& ca, const PolarGridSpec& po,
                                    int level);

}  // namespace panocc
