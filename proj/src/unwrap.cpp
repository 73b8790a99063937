#include "panocc/unwrap.hpp"

#include <limits>
#include <string>

#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {

RemapTable build_remap(int width, int height, const CameraModel& model) {
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::InvalidArgument, "remap output must be at least 2x2");
  }
  RemapTable table;
  table.width = width;
  table.height = height;
  table.raw_width = model.raw_width();
  table.raw_height = model.raw_height();
  table.src_u.assign(table.size(), std::numeric_limits<double>::quiet_NaN());
  table.src_v.assign(table.size(), std::numeric_limits<double>::quiet_NaN());
  table.valid.assign(table.size(), 0);

  parallel_for(static_cast<std::size_t>(height), [&](std::size_t y) {
    for (int x = 0; x < width; ++x) {
      const SphericalAngles angles =
          equi_to_angles(static_cast<double>(x), static_cast<double>(y), width, height);
      if (!model.in_range(polar_angle(angles))) continue;
      const Pixel src = model.raw_pixel_unchecked(angles);
      const std::size_t idx = y * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
      table.src_u[idx] = src.u;
      table.src_v[idx] = src.v;
      table.valid[idx] =
          footprint_in_bounds(src.u, src.v, table.raw_width, table.raw_height, false) ? 1 : 0;
    }
  });
  return table;
}

ImagePlane apply_remap(const ImagePlane& raw, const RemapTable& table, double fill_value) {
  if (raw.width != table.raw_width || raw.height != table.raw_height) {
    throw Error(ErrorCode::DimMismatch,
                "raw image is " + std::to_string(raw.width) + "x" + std::to_string(raw.height) +
                    ", table expects " + std::to_string(table.raw_width) + "x" +
                    std::to_string(table.raw_height));
  }
  ImagePlane out(table.width, table.height, raw.channels, fill_value);
  out.valid = table.valid;
  const auto channels = static_cast<std::size_t>(raw.channels);
  parallel_for(static_cast<std::size_t>(table.height), [&](std::size_t y) {
    for (std::size_t x = 0; x < static_cast<std::size_t>(table.width); ++x) {
      const std::size_t idx = y * static_cast<std::size_t>(table.width) + x;
      if (!table.valid[idx]) continue;
      bilinear_sample(raw, table.src_u[idx], table.src_v[idx], false,
                      std::span<double>(out.data.data() + idx * channels, channels));
    }
  });
  return out;
}

}  // namespace panocc
