#pragma once

#include <cstdint>
#include <vector>

#include "panocc/camera.hpp"
#include "panocc/image.hpp"

namespace panocc {

/// Per-output-pixel source coordinates for annulus -> equirectangular.
///
/// Entry (x, y) is at y * width + x. Entries whose zenith angle is outside the
/// camera range hold NaN coordinates; entries whose bilinear footprint leaves
/// the raw image keep their (finite) coordinates but are marked invalid.
struct RemapTable {
  int width = 0;
  int height = 0;
  int raw_width = 0;
  int raw_height = 0;
  std::vector<double> src_u;
  std::vector<double> src_v;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
};

/// Samples the raw annulus at forward_project_raw(equi_to_angles(x, y)) for
/// every output pixel center (x, y). Requires width, height >= 2.
RemapTable build_remap(int width, int height, const CameraModel& model);

/// Bilinear resampling of `raw` through `table`. Invalid output pixels hold
/// `fill_value`; the returned plane carries the table's validity mask.
/// Throws DimMismatch when `raw` is not raw_width x raw_height.
ImagePlane apply_remap(const ImagePlane& raw, const RemapTable& table, double fill_value = 0.0);

}  // namespace panocc
