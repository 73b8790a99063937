#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "panocc/camera.hpp"
#include "panocc/image.hpp"
#include "panocc/volume.hpp"

namespace panocc {

/// Image-space features of one view at stride `scale` (1, 4, 8 or 16).
struct FeaturePlane : ImagePlane {
  int scale = 1;
  View view = View::Equi;

  FeaturePlane() = default;
  FeaturePlane(ImagePlane img, int s, View v) : ImagePlane(std::move(img)), scale(s), view(v) {}
};

/// Global pixel shift applied to projected coordinates before sampling.
struct PixelOffset {
  double dx = 0.0;
  double dy = 0.0;
};

/// Linear head on globally pooled features: offset = W^T GAP(F) + b, with W
/// stored as channels x 2 (row c holds the x and y weights of channel c).
struct GdcHead {
  int channels = 0;
  std::vector<double> weights;
  std::array<double, 2> bias{0.0, 0.0};

  /// All weights and bias zero: the offset is (0, 0) for any input.
  static GdcHead zero_initialized(int channels);
};

/// GAP over valid pixels followed by the linear head. Throws
/// EmptyValidRegion when no pixel is valid, DimMismatch on channel mismatch.
PixelOffset gdc_offset(const FeaturePlane& plane, const GdcHead& head);

/// Shifts every coordinate by `delta` and re-checks its bilinear footprint
/// against a width x height plane of the given view (equi columns wrap).
/// Samples that were already invalid stay invalid.
std::vector<Projection> apply_gdc(std::span<const Projection> coords, PixelOffset delta,
                                  int width, int height, View view);

/// Samples `plane` at the projection of every camera-frame centroid.
///
/// `grid` describes the voxel layout of `centroids_cam` (same order). A voxel
/// is valid when its projection is valid, its shifted footprint lies inside the
/// plane and every contributing tap is a valid plane pixel; invalid voxels are
/// zero. Equi planes wrap horizontally, raw planes never do. Shifted sample
/// coordinates are rounded to the nearest multiple of 2^-20 pixel.
/// Throws DimMismatch when the centroid count does not match the grid or the
/// plane's view differs from `view`.
FeatureVolume lift_volume(const GridSpec& grid, std::span<const Vec3> centroids_cam, View view,
                          const CameraModel& model, const FeaturePlane& plane,
                          std::optional<PixelOffset> delta = std::nullopt);

/// Per-voxel logits over the lifted scales, voxel-major (scales contiguous).
struct ScaleWeights {
  std::size_t scales = 0;
  std::vector<double> logits;

  static ScaleWeights uniform(std::size_t voxels, std::size_t scales);
};

/// Softmax of `logits` restricted to entries with valid[s] != 0; masked
/// entries get weight 0. Returns all zeros when nothing is valid.
std::vector<double> convex_weights(std::span<const double> logits,
                                   std::span<const std::uint8_t> valid);

/// Convex per-voxel combination of lifted volumes. Weights are renormalized
/// over the scales valid at each voxel; the output is valid where any input
/// is. Throws GridMismatch when grids or channel counts differ and
/// DimMismatch when the logits do not match voxels x volumes.
FeatureVolume fuse_scales(std::span<const FeatureVolume> volumes, const ScaleWeights& weights);

}  // namespace panocc
