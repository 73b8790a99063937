#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace panocc {

namespace detail {
// Returns a exactly when a == b, whatever t is.
inline double mix(double a, double b, double t) { return a + t * (b - a); }
}  // namespace detail

/// Row-major, channel-interleaved image: sample (x, y, c) lives at
/// (y * width + x) * channels + c.
struct ImagePlane {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;
  double fill_value = 0.0;
  // Per-pixel validity (1 = valid). Empty means every pixel is valid.
  std::vector<std::uint8_t> valid;

  ImagePlane() = default;
  ImagePlane(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill), fill_value(fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool is_valid(std::size_t pixel) const { return valid.empty() || valid[pixel] != 0; }

  std::span<double> at(int x, int y) {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<const double> at(int x, int y) const {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
};

/// True when the bilinear footprint of (u, v) lies inside the image. With
/// `wrap_u` the horizontal axis is periodic and only v is checked.
inline bool footprint_in_bounds(double u, double v, int width, int height, bool wrap_u) {
  const bool v_ok = v >= 0.0 && v <= height - 1.0;
  if (wrap_u) return v_ok && std::isfinite(u);
  return v_ok && u >= 0.0 && u <= width - 1.0;
}

/// Bilinear sample of every channel at (u, v); integer coordinates are pixel
/// centers; each axis blends as a + t (b - a). The caller guarantees
/// footprint_in_bounds. A tap with zero weight is never read, so sampling
/// exactly on the last row/column is allowed.
inline void bilinear_sample(const ImagePlane& img, double u, double v, bool wrap_u,
                            std::span<double> out) {
  const double fu = std::floor(u);
  const double fx = u - fu;
  const double fv = std::floor(v);
  const double fy = v - fv;

  long x0 = static_cast<long>(fu);
  long x1 = fx > 0.0 ? x0 + 1 : x0;
  if (wrap_u) {
    const long w = img.width;
    x0 = ((x0 % w) + w) % w;
    x1 = ((x1 % w) + w) % w;
  }
  const long y0 = static_cast<long>(fv);
  const long y1 = fy > 0.0 ? y0 + 1 : y0;

  const auto stride = static_cast<std::size_t>(img.channels);
  const auto row = static_cast<std::size_t>(img.width);
  const double* base = img.data.data();
  const double* p00 = base + (static_cast<std::size_t>(y0) * row + static_cast<std::size_t>(x0)) * stride;
  const double* p10 = base + (static_cast<std::size_t>(y0) * row + static_cast<std::size_t>(x1)) * stride;
  const double* p01 = base + (static_cast<std::size_t>(y1) * row + static_cast<std::size_t>(x0)) * stride;
  const double* p11 = base + (static_cast<std::size_t>(y1) * row + static_cast<std::size_t>(x1)) * stride;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double top = detail::mix(p00[c], p10[c], fx);
    const double bottom = detail::mix(p01[c], p11[c], fx);
    out[c] = detail::mix(top, bottom, fy);
  }
}

}  // namespace panocc
