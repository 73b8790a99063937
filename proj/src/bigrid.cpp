#include "panocc/bigrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "panocc/camera.hpp"
#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t div_up(std::size_t n, int level) {
  const auto l = static_cast<std::size_t>(level);
  return (n + l - 1) / l;
}

void check_level(int level) {
  if (!is_supported_level(level)) {
    throw Error(ErrorCode::InvalidArgument, "level must be 1, 2 or 4, got " + std::to_string(level));
  }
}

// Bin of a continuous cell coordinate t in [0, n]; faces go to the lower bin.
std::size_t bin_of(double t, std::size_t n) {
  if (!(t > 0.0)) return 0;
  if (t >= static_cast<double>(n)) return n - 1;
  const double f = std::floor(t);
  const auto b = static_cast<std::size_t>(f);
  return (f == t && b > 0) ? b - 1 : b;
}

}  // namespace

Vec3 CartesianGridSpec::centroid(std::size_t i, std::size_t j, std::size_t k) const {
  return {x0 + (static_cast<double>(i) + 0.5) * dx, y0 + (static_cast<double>(j) + 0.5) * dy,
          z0 + (static_cast<double>(k) + 0.5) * dz};
}

void CartesianGridSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw Error(ErrorCode::InvalidArgument, "grid counts must be >= 1");
  if (!(dx > 0.0 && dy > 0.0 && dz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "voxel edges must be > 0");
  }
}

CartesianGridSpec CartesianGridSpec::at_level(int level) const {
  check_level(level);
  CartesianGridSpec out = *this;
  out.nx = div_up(nx, level);
  out.ny = div_up(ny, level);
  out.nz = div_up(nz, level);
  // Coarse voxel i is centered on fine voxel level * i.
  const double shift = 0.5 * (1.0 - static_cast<double>(level));
  out.x0 = x0 + shift * dx;
  out.y0 = y0 + shift * dy;
  out.z0 = z0 + shift * dz;
  out.dx = dx * level;
  out.dy = dy * level;
  out.dz = dz * level;
  return out;
}

CartesianGridSpec CartesianGridSpec::quadocc() {
  return {64, 64, 8, -12.8, -12.8, -1.6, 0.4, 0.4, 0.4};
}

CartesianGridSpec CartesianGridSpec::h3o() {
  return {128, 128, 16, -12.8, -12.8, -1.6, 0.2, 0.2, 0.2};
}

const char* to_string(RadialSpacing spacing) {
  return spacing == RadialSpacing::Linear ? "linear" : "log";
}

RadialSpacing radial_spacing_from_string(const std::string& name) {
  if (name == "linear") return RadialSpacing::Linear;
  if (name == "log") return RadialSpacing::Log;
  throw Error(ErrorCode::InvalidArgument, "unknown radial spacing '" + name + "'");
}

void PolarGridSpec::validate() const {
  if (nr < 1 || nphi < 1 || nz < 1) throw Error(ErrorCode::InvalidArgument, "grid counts must be >= 1");
  if (!(r1 > r0 && r0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need r1 > r0 >= 0");
  if (spacing == RadialSpacing::Log && !(r0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "log radial spacing needs r0 > 0");
  }
  if (!(dz > 0.0)) throw Error(ErrorCode::InvalidArgument, "layer height must be > 0");
}

double PolarGridSpec::radial_edge(std::size_t p) const {
  const double frac = static_cast<double>(p) / static_cast<double>(nr);
  if (spacing == RadialSpacing::Log) return r0 * std::pow(r1 / r0, frac);
  return r0 + static_cast<double>(p) * ((r1 - r0) / static_cast<double>(nr));
}

double PolarGridSpec::radius(std::size_t p) const {
  if (spacing == RadialSpacing::Log) return 0.5 * (radial_edge(p) + radial_edge(p + 1));
  return r0 + (static_cast<double>(p) + 0.5) * ((r1 - r0) / static_cast<double>(nr));
}

double PolarGridSpec::azimuth(std::size_t q) const {
  return -kPi + (static_cast<double>(q) + 0.5) * (kTwoPi / static_cast<double>(nphi));
}

Vec3 PolarGridSpec::centroid(std::size_t p, std::size_t q, std::size_t k) const {
  const double r = radius(p);
  const double phi = azimuth(q);
  return {r * std::cos(phi), r * std::sin(phi), height(k)};
}

PolarGridSpec PolarGridSpec::at_level(int level) const {
  check_level(level);
  PolarGridSpec out = *this;
  out.nr = div_up(nr, level);
  out.nphi = div_up(nphi, level);
  out.nz = div_up(nz, level);
  out.dz = dz * level;
  const double shells = static_cast<double>(out.nr * static_cast<std::size_t>(level)) /
                        static_cast<double>(nr);
  if (spacing == RadialSpacing::Log) {
    out.r1 = r0 * std::pow(r1 / r0, shells);
  } else {
    out.r1 = r0 + (r1 - r0) * shells;
  }
  return out;
}

PolarGridSpec PolarGridSpec::default_for(const CartesianGridSpec& ca) {
  PolarGridSpec po;
  po.nr = std::max<std::size_t>(1, ca.nx / 2);
  po.nphi = 2 * ca.nx;
  po.nz = ca.nz;
  po.z0 = ca.z0;
  po.dz = ca.dz;
  po.r0 = 0.0;
  const double reach[4] = {ca.x0, ca.x0 + static_cast<double>(ca.nx) * ca.dx, ca.y0,
                           ca.y0 + static_cast<double>(ca.ny) * ca.dy};
  double r1 = 0.0;
  for (double e : reach) r1 = std::max(r1, std::abs(e));
  po.r1 = r1;
  return po;
}

std::vector<Vec3> cartesian_centroids(const CartesianGridSpec& spec) {
  spec.validate();
  std::vector<Vec3> out(spec.count());
  for (std::size_t k = 0; k < spec.nz; ++k) {
    for (std::size_t j = 0; j < spec.ny; ++j) {
      for (std::size_t i = 0; i < spec.nx; ++i) out[(k * spec.ny + j) * spec.nx + i] = spec.centroid(i, j, k);
    }
  }
  return out;
}

std::vector<Vec3> polar_centroids(const PolarGridSpec& spec) {
  spec.validate();
  std::vector<Vec3> out(spec.count());
  for (std::size_t k = 0; k < spec.nz; ++k) {
    for (std::size_t q = 0; q < spec.nphi; ++q) {
      for (std::size_t p = 0; p < spec.nr; ++p) {
        out[(k * spec.nphi + q) * spec.nr + p] = spec.centroid(p, q, k);
      }
    }
  }
  return out;
}

std::array<std::size_t, 3> polar_cell_of(const PolarGridSpec& spec, const Vec3& pt) {
  const double r = std::sqrt(pt.x * pt.x + pt.y * pt.y);
  double t_r;
  if (spec.spacing == RadialSpacing::Log) {
    t_r = r > 0.0 ? std::log(r / spec.r0) / std::log(spec.r1 / spec.r0) * static_cast<double>(spec.nr)
                  : -std::numeric_limits<double>::infinity();
  } else {
    t_r = (r - spec.r0) / ((spec.r1 - spec.r0) / static_cast<double>(spec.nr));
  }
  const std::size_t p = bin_of(t_r, spec.nr);

  std::size_t q = 0;
  if (r > 0.0) {
    const double phi = wrap_azimuth(std::atan2(pt.y, pt.x));
    q = bin_of((phi + kPi) / (kTwoPi / static_cast<double>(spec.nphi)), spec.nphi);
  }
  const std::size_t k = bin_of((pt.z - spec.z0) / spec.dz, spec.nz);
  return {p, q, k};
}

std::size_t polar_index_of(const PolarGridSpec& spec, const Vec3& p) {
  const auto [pr, q, k] = polar_cell_of(spec, p);
  return (k * spec.nphi + q) * spec.nr + pr;
}

CrossIndexTable build_cross_indices(const CartesianGridSpec& ca, const PolarGridSpec& po,
                                    int level) {
  check_level(level);
  ca.validate();
  po.validate();
  const CartesianGridSpec ca_l = ca.at_level(level);
  const PolarGridSpec po_l = po.at_level(level);
  if (po_l.count() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "polar grid too large for 32-bit indices");
  }
  CrossIndexTable table;
  table.level = level;
  table.polar_count = po_l.count();
  table.indices.resize(ca_l.count());
  parallel_for(ca_l.count(), [&](std::size_t idx) {
    const std::size_t i = idx % ca_l.nx;
    const std::size_t j = (idx / ca_l.nx) % ca_l.ny;
    const std::size_t k = idx / (ca_l.nx * ca_l.ny);
    table.indices[idx] = static_cast<std::uint32_t>(polar_index_of(po_l, ca_l.centroid(i, j, k)));
  });
  return table;
}

}  // namespace panocc
