#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace panocc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double norm(const Vec3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

// Continuous pixel coordinate; integer values are pixel centers.
struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Rigid transform p' = R p + t, R row-major.
struct RigidTransform {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{};

  Vec3 apply(const Vec3& p) const {
    const auto& r = rotation;
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
            r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
            r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
  }

  RigidTransform inverse() const {
    const auto& r = rotation;
    RigidTransform inv;
    inv.rotation = {r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]};
    const Vec3 t = translation;
    const auto& q = inv.rotation;
    inv.translation = {-(q[0] * t.x + q[1] * t.y + q[2] * t.z),
                       -(q[3] * t.x + q[4] * t.y + q[5] * t.z),
                       -(q[6] * t.x + q[7] * t.y + q[8] * t.z)};
    return inv;
  }

  static RigidTransform rotation_z(double angle, Vec3 t = {}) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RigidTransform tf;
    tf.rotation = {c, -s, 0, s, c, 0, 0, 0, 1};
    tf.translation = t;
    return tf;
  }

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

// Voxel lattice extents. Flat voxel index is (k * ny + j) * nx + i.
struct GridDims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * ny + j) * nx + i;
  }

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

}  // namespace panocc
