#include "panocc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {
namespace {

constexpr int kClasses = 4;
constexpr int kFeatureDim = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Vec3 rotate(const std::array<double, 9>& r, const Vec3& v) {
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z, r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

bool occupied(std::uint8_t label) { return label != 0 && label != kIgnoreLabel; }

SynthScene empty_fixture() {
  SynthScene s;
  s.grid = {32, 32, 8, -6.4, -6.4, -1.2, 0.4, 0.4, 0.4};
  s.occupancy = OccupancyGrid(s.grid.dims());
  s.num_classes = kClasses;
  s.feature_dim = kFeatureDim;
  s.palette.assign(static_cast<std::size_t>(kClasses) * kFeatureDim, 0.0);
  for (int c = 1; c < kClasses; ++c) s.palette[static_cast<std::size_t>(c) * kFeatureDim + (c - 1)] = 1.0;
  return s;
}

}  // namespace

void SynthScene::validate() const {
  grid.validate();
  if (!(occupancy.dims == grid.dims()) || occupancy.labels.size() != grid.count()) {
    throw Error(ErrorCode::DimMismatch, "occupancy does not match the scene grid");
  }
  if (palette.size() != static_cast<std::size_t>(num_classes) * feature_dim) {
    throw Error(ErrorCode::DimMismatch, "palette must be classes x feature_dim");
  }
  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) {
      double dist = 0.0;
      for (int f = 0; f < feature_dim; ++f) {
        dist = std::max(dist, std::abs(palette_row(a)[f] - palette_row(b)[f]));
      }
      if (dist < 0.1) throw Error(ErrorCode::InvalidArgument, "palette rows must differ by >= 0.1");
    }
  }
}

std::optional<std::size_t> first_hit(const SynthScene& scene, const Vec3& origin, const Vec3& dir,
                                     double t_max) {
  const auto& g = scene.grid;
  const double lo[3] = {g.x0, g.y0, g.z0};
  const double hi[3] = {g.x0 + static_cast<double>(g.nx) * g.dx,
                        g.y0 + static_cast<double>(g.ny) * g.dy,
                        g.z0 + static_cast<double>(g.nz) * g.dz};
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  double t_enter = 0.0;
  double t_exit = t_max;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_exit < t_enter) return std::nullopt;

  const double step = std::min({g.dx, g.dy, g.dz}) / 4.0;
  for (std::size_t n = 0;; ++n) {
    const double t = t_enter + (static_cast<double>(n) + 0.5) * step;
    if (t > t_exit) break;
    const double px = o[0] + t * d[0];
    const double py = o[1] + t * d[1];
    const double pz = o[2] + t * d[2];
    const double fi = std::floor((px - g.x0) / g.dx);
    const double fj = std::floor((py - g.y0) / g.dy);
    const double fk = std::floor((pz - g.z0) / g.dz);
    if (fi < 0 || fj < 0 || fk < 0 || fi >= static_cast<double>(g.nx) ||
        fj >= static_cast<double>(g.ny) || fk >= static_cast<double>(g.nz)) {
      continue;
    }
    const std::size_t v = g.dims().flat(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj),
                                        static_cast<std::size_t>(fk));
    if (occupied(scene.occupancy.labels[v])) return v;
  }
  return std::nullopt;
}

bool voxel_visible(const SynthScene& scene, std::size_t voxel) {
  const auto& g = scene.grid;
  const Vec3 c = g.centroid(voxel % g.nx, (voxel / g.nx) % g.ny, voxel / (g.nx * g.ny));
  const Vec3 origin = scene.pose.inverse().translation;
  const Vec3 delta{c.x - origin.x, c.y - origin.y, c.z - origin.z};
  const double dist = norm(delta);
  if (dist == 0.0) return false;
  const auto hit = first_hit(scene, origin, {delta.x / dist, delta.y / dist, delta.z / dist}, dist);
  return hit && *hit == voxel;
}

FeaturePlane render_equi(const SynthScene& scene, int width, int height) {
  scene.validate();
  FeaturePlane plane(ImagePlane(width, height, scene.feature_dim), 1, View::Equi);
  const RigidTransform to_grid = scene.pose.inverse();
  const Vec3 origin = to_grid.translation;
  const auto channels = static_cast<std::size_t>(scene.feature_dim);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t y) {
    for (int x = 0; x < width; ++x) {
      const SphericalAngles a =
          equi_to_angles(static_cast<double>(x), static_cast<double>(y), width, height);
      const Vec3 dir_cam{std::cos(a.theta) * std::cos(a.phi), std::cos(a.theta) * std::sin(a.phi),
                         std::sin(a.theta)};
      const auto hit = first_hit(scene, origin, rotate(to_grid.rotation, dir_cam),
                                 std::numeric_limits<double>::infinity());
      if (!hit) continue;
      const auto row = scene.palette_row(scene.occupancy.labels[*hit]);
      std::copy(row.begin(), row.end(),
                plane.data.begin() + static_cast<std::ptrdiff_t>((y * width + x) * channels));
    }
  });
  return plane;
}

FixturePreset fixture_preset_from_string(const std::string& name) {
  if (name == "corridor") return FixturePreset::Corridor;
  if (name == "ring") return FixturePreset::Ring;
  if (name == "clutter") return FixturePreset::Clutter;
  throw Error(ErrorCode::UnknownPreset, "unknown fixture preset '" + name + "'");
}

const char* to_string(FixturePreset preset) {
  switch (preset) {
    case FixturePreset::Corridor: return "corridor";
    case FixturePreset::Ring: return "ring";
    case FixturePreset::Clutter: return "clutter";
  }
  return "unknown";
}

SynthScene make_fixture(std::uint64_t seed, FixturePreset preset) {
  SynthScene s = empty_fixture();
  const GridDims d = s.grid.dims();
  auto& labels = s.occupancy.labels;
  const std::uint64_t mixed = splitmix64(seed);

  switch (preset) {
    case FixturePreset::Corridor: {
      const std::size_t w = 8 + mixed % 4;
      const std::size_t h = 4 + (mixed / 4) % 4;
      for (std::size_t i = 0; i < d.nx; ++i) {
        for (std::size_t k = 0; k < h; ++k) {
          labels[d.flat(i, w, k)] = 2;
          labels[d.flat(i, d.ny - 1 - w, k)] = 2;
        }
        for (std::size_t j = w + 1; j < d.ny - 1 - w; ++j) labels[d.flat(i, j, 0)] = 1;
      }
      break;
    }
    case FixturePreset::Ring: {
      const double radius = 6.0 + static_cast<double>(mixed % 4);
      const double cx = static_cast<double>(d.nx) / 2.0;
      const double cy = static_cast<double>(d.ny) / 2.0;
      for (std::size_t j = 0; j < d.ny; ++j) {
        for (std::size_t i = 0; i < d.nx; ++i) {
          const double dx = static_cast<double>(i) + 0.5 - cx;
          const double dy = static_cast<double>(j) + 0.5 - cy;
          const double dist = std::sqrt(dx * dx + dy * dy);
          if (dist < radius || dist >= radius + 2.0) continue;
          for (std::size_t k = 0; k < d.nz; ++k) labels[d.flat(i, j, k)] = k < d.nz / 2 ? 2 : 3;
        }
      }
      break;
    }
    case FixturePreset::Clutter: {
      std::mt19937_64 rng(mixed);
      for (std::size_t j = 0; j < d.ny; ++j) {
        for (std::size_t i = 0; i < d.nx; ++i) labels[d.flat(i, j, 0)] = 1;
      }
      const std::size_t boxes = 6 + rng() % 5;
      std::size_t placed = 0;
      while (placed < boxes) {
        const std::size_t sx = 1 + rng() % 4;
        const std::size_t sy = 1 + rng() % 4;
        const std::size_t sz = 1 + rng() % 5;
        const std::size_t i0 = rng() % (d.nx - sx + 1);
        const std::size_t j0 = rng() % (d.ny - sy + 1);
        const auto label = static_cast<std::uint8_t>(2 + rng() % 2);
        // Keep the camera column [14, 18)^2 free.
        if (i0 < 18 && i0 + sx > 14 && j0 < 18 && j0 + sy > 14) continue;
        for (std::size_t k = 1; k < 1 + sz; ++k) {
          for (std::size_t j = j0; j < j0 + sy; ++j) {
            for (std::size_t i = i0; i < i0 + sx; ++i) labels[d.flat(i, j, k)] = label;
          }
        }
        ++placed;
      }
      break;
    }
  }
  return s;
}

SynthScene make_fixture(std::uint64_t seed, const std::string& preset) {
  return make_fixture(seed, fixture_preset_from_string(preset));
}

CameraModel fixture_camera() {
  CameraModel::Params p;
  p.coeffs = {0.0, 300.0};
  p.u0 = 1023.5;
  p.v0 = 1023.5;
  p.theta_min = 0.0;
  p.theta_max = 3.141592653589793;
  p.width = 2048;
  p.height = 2048;
  return CameraModel(p);
}

}  // namespace panocc
