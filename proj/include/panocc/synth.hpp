#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "panocc/bigrid.hpp"
#include "panocc/camera.hpp"
#include "panocc/lifting.hpp"
#include "panocc/ssc.hpp"

namespace panocc {

/// Voxel world with known semantics, used as a ground-truth oracle for the
/// projection and lifting code.
struct SynthScene {
  CartesianGridSpec grid;
  OccupancyGrid occupancy;
  int num_classes = 0;
  int feature_dim = 0;
  /// Row c is the feature rendered for class c; row 0 (empty) is zero.
  std::vector<double> palette;
  /// Grid frame -> camera frame.
  RigidTransform pose;

  std::span<const double> palette_row(std::size_t c) const {
    return {palette.data() + c * static_cast<std::size_t>(feature_dim),
            static_cast<std::size_t>(feature_dim)};
  }
  /// Throws InvalidArgument when palette rows are closer than 0.1 in L-inf.
  void validate() const;
};

/// First occupied voxel (flat index) met by the ray origin + t dir for
/// t in (0, t_max], marched at a quarter of the smallest voxel edge. Origin
/// and direction are in the grid frame; dir must be unit length.
std::optional<std::size_t> first_hit(const SynthScene& scene, const Vec3& origin, const Vec3& dir,
                                     double t_max);

/// True when the camera sees voxel `voxel` first along the ray to its centroid.
bool voxel_visible(const SynthScene& scene, std::size_t voxel);

/// Equirectangular plane (scale 1): every pixel carries the palette row of
/// the first voxel hit by its ray, or zeros.
FeaturePlane render_equi(const SynthScene& scene, int width, int height);

enum class FixturePreset { Corridor, Ring, Clutter };

FixturePreset fixture_preset_from_string(const std::string& name);
const char* to_string(FixturePreset preset);

/// Deterministic scene for a seed. All presets use a 32 x 32 x 8 grid of
/// 0.4 m voxels spanning [-6.4, 6.4]^2 x [-1.2, 2.0] with the camera at the
/// origin (identity pose) and four classes: 0 empty, 1 floor, 2 and 3 solids.
///
///  - corridor: walls of class 2 at rows j = w and j = 31 - w (w = 8 + s % 4)
///    for all i and k < h (h = 4 + (s / 4) % 4), floor class 1 at k = 0 for
///    w < j < 31 - w. Occupied count: 64 h + 32 (30 - 2 w).
///  - ring: voxels whose column center lies at distance [R, R + 2) voxels
///    from the grid center (R = 6 + s % 4), class 2 for k < 4 and 3 above.
///    Invariant under 90-degree rotation about the grid center.
///  - clutter: floor class 1 at k = 0 everywhere plus 6..10 random boxes of
///    class 2 or 3 that keep clear of the 4 x 4 camera column.
/// where s = seed mixed through splitmix64.
SynthScene make_fixture(std::uint64_t seed, FixturePreset preset);
SynthScene make_fixture(std::uint64_t seed, const std::string& preset);

/// Wide camera used with fixtures: r = 300 polar over [0, pi], 2048 x 2048.
CameraModel fixture_camera();

}  // namespace panocc
