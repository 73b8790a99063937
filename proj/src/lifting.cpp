#include "panocc/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {
namespace {

// Every tap with non-zero bilinear weight must be a valid plane pixel.
bool taps_valid(const ImagePlane& plane, double u, double v, bool wrap_u) {
  if (plane.valid.empty()) return true;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  long xs[2] = {static_cast<long>(fu), static_cast<long>(fu) + (u > fu ? 1 : 0)};
  const long ys[2] = {static_cast<long>(fv), static_cast<long>(fv) + (v > fv ? 1 : 0)};
  if (wrap_u) {
    for (long& x : xs) x = ((x % plane.width) + plane.width) % plane.width;
  }
  for (long y : ys) {
    for (long x : xs) {
      if (!plane.valid[static_cast<std::size_t>(y) * plane.width + static_cast<std::size_t>(x)]) {
        return false;
      }
    }
  }
  return true;
}

// Sample coordinates live on a 2^-20 pixel lattice, like fixed-point texture
// samplers. Trig roundoff (~1e-13 px) then no longer reaches the bilinear
// weights, so rays that agree up to rounding sample identical values.
constexpr double kSubpixel = 1048576.0;
double snap(double x) { return std::nearbyint(x * kSubpixel) / kSubpixel; }

}  // namespace

GdcHead GdcHead::zero_initialized(int channels) {
  GdcHead head;
  head.channels = channels;
  head.weights.assign(static_cast<std::size_t>(channels) * 2, 0.0);
  return head;
}

PixelOffset gdc_offset(const FeaturePlane& plane, const GdcHead& head) {
  if (head.channels != plane.channels ||
      head.weights.size() != static_cast<std::size_t>(head.channels) * 2) {
    throw Error(ErrorCode::DimMismatch, "GDC head expects " + std::to_string(head.channels) +
                                            " channels, plane has " +
                                            std::to_string(plane.channels));
  }
  std::vector<std::size_t> pixels;
  pixels.reserve(plane.pixel_count());
  for (std::size_t i = 0; i < plane.pixel_count(); ++i) {
    if (plane.is_valid(i)) pixels.push_back(i);
  }
  if (pixels.empty()) throw Error(ErrorCode::EmptyValidRegion, "feature plane has no valid pixels");

  const auto channels = static_cast<std::size_t>(plane.channels);
  std::vector<double> column(pixels.size());
  PixelOffset delta{head.bias[0], head.bias[1]};
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t n = 0; n < pixels.size(); ++n) column[n] = plane.data[pixels[n] * channels + c];
    const double mean = pairwise_sum(column) / static_cast<double>(pixels.size());
    delta.dx += head.weights[c * 2 + 0] * mean;
    delta.dy += head.weights[c * 2 + 1] * mean;
  }
  return delta;
}

std::vector<Projection> apply_gdc(std::span<const Projection> coords, PixelOffset delta,
                                  int width, int height, View view) {
  std::vector<Projection> out(coords.begin(), coords.end());
  for (auto& c : out) {
    c.pixel.u += delta.dx;
    c.pixel.v += delta.dy;
    c.valid = c.valid && footprint_in_bounds(c.pixel.u, c.pixel.v, width, height, view == View::Equi);
  }
  return out;
}

FeatureVolume lift_volume(const GridSpec& grid, std::span<const Vec3> centroids_cam, View view,
                          const CameraModel& model, const FeaturePlane& plane,
                          std::optional<PixelOffset> delta) {
  FeatureVolume out(grid, plane.channels);
  if (centroids_cam.size() != out.voxel_count()) {
    throw Error(ErrorCode::DimMismatch, "centroid count does not match the grid");
  }
  if (plane.view != view) {
    throw Error(ErrorCode::DimMismatch, std::string("plane view is ") + to_string(plane.view) +
                                            ", lifting requested " + to_string(view));
  }
  if (plane.data.size() != plane.pixel_count() * static_cast<std::size_t>(plane.channels)) {
    throw Error(ErrorCode::DimMismatch, "feature plane data does not match its dimensions");
  }
  const bool wrap = view == View::Equi;
  parallel_for(centroids_cam.size(), [&](std::size_t idx) {
    const Vec3& c = centroids_cam[idx];
    bool ok = norm(c) >= 1e-9;
    Projection proj;
    if (ok) {
      proj = project_point(c, view, model, plane.width, plane.height);
      if (delta) {
        proj.pixel.u += delta->dx;
        proj.pixel.v += delta->dy;
      }
      proj.pixel.u = snap(proj.pixel.u);
      proj.pixel.v = snap(proj.pixel.v);
      ok = proj.valid &&
           footprint_in_bounds(proj.pixel.u, proj.pixel.v, plane.width, plane.height, wrap) &&
           taps_valid(plane, proj.pixel.u, proj.pixel.v, wrap);
    }
    out.valid[idx] = ok ? 1 : 0;
    if (ok) bilinear_sample(plane, proj.pixel.u, proj.pixel.v, wrap, out.at(idx));
  });
  return out;
}

ScaleWeights ScaleWeights::uniform(std::size_t voxels, std::size_t scales) {
  return {scales, std::vector<double>(voxels * scales, 0.0)};
}

std::vector<double> convex_weights(std::span<const double> logits,
                                   std::span<const std::uint8_t> valid) {
  std::vector<double> w(logits.size(), 0.0);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < logits.size(); ++s) {
    if (valid[s]) peak = std::max(peak, logits[s]);
  }
  if (peak == -std::numeric_limits<double>::infinity()) return w;
  double total = 0.0;
  for (std::size_t s = 0; s < logits.size(); ++s) {
    if (!valid[s]) continue;
    w[s] = std::exp(logits[s] - peak);
    total += w[s];
  }
  for (double& x : w) x /= total;
  return w;
}

FeatureVolume fuse_scales(std::span<const FeatureVolume> volumes, const ScaleWeights& weights) {
  if (volumes.empty()) throw Error(ErrorCode::InvalidArgument, "no volumes to fuse");
  const FeatureVolume& first = volumes.front();
  for (const auto& v : volumes) {
    if (!(v.grid == first.grid) || v.channels != first.channels) {
      throw Error(ErrorCode::GridMismatch, "fused volumes must share grid and channel count");
    }
  }
  const std::size_t voxels = first.voxel_count();
  const std::size_t scales = volumes.size();
  if (weights.scales != scales || weights.logits.size() != voxels * scales) {
    throw Error(ErrorCode::DimMismatch, "scale logits must be voxels x " + std::to_string(scales));
  }

  FeatureVolume out(first.grid, first.channels);
  const auto channels = static_cast<std::size_t>(first.channels);
  parallel_for(voxels, [&](std::size_t v) {
    std::vector<std::uint8_t> valid(scales);
    bool any = false;
    for (std::size_t s = 0; s < scales; ++s) {
      valid[s] = volumes[s].valid[v];
      any = any || valid[s];
    }
    out.valid[v] = any ? 1 : 0;
    if (!any) return;
    const auto alpha = convex_weights(
        std::span<const double>(weights.logits.data() + v * scales, scales), valid);
    auto dst = out.at(v);
    for (std::size_t c = 0; c < channels; ++c) {
      double acc = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t s = 0; s < scales; ++s) {
        if (!valid[s]) continue;
        const double x = volumes[s].at(v)[c];
        acc += alpha[s] * x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      // Rounding can push a convex combination one ulp past the hull.
      dst[c] = std::clamp(acc, lo, hi);
    }
  });
  return out;
}

}  // namespace panocc
