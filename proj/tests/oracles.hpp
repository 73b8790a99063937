#pragma once

// Deliberately naive reference implementations. They share no code with the
// library beyond its data types: loops are written out term by term, sums run
// left to right, and bilinear sampling uses explicit tap weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "panocc/amoe3d.hpp"
#include "panocc/bigrid.hpp"
#include "panocc/camera.hpp"
#include "panocc/lifting.hpp"
#include "panocc/ssc.hpp"
#include "panocc/volume.hpp"

namespace oracle {

using panocc::FeatureVolume;
using panocc::GridDims;
using panocc::Vec3;

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- camera

inline double poly_sum(const std::vector<double>& a, double t) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * std::pow(t, static_cast<double>(i));
  return r;
}

inline double bisect_root(const std::vector<double>& a, double target, double lo, double hi,
                          long steps) {
  const bool increasing = poly_sum(a, hi) > poly_sum(a, lo);
  for (long s = 0; s < steps && hi - lo > 0.0; ++s) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool below = poly_sum(a, mid) < target;
    if (below == increasing) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// The remap entry for output pixel (x, y), recomputed from the formulas.
struct RemapEntry {
  double u = std::numeric_limits<double>::quiet_NaN();
  double v = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

inline RemapEntry remap_entry(const panocc::CameraModel::Params& p, int width, int height, int x, int y) {
  const double phi = 2.0 * kPi / width * x - kPi;
  const double elevation = kPi / 2.0 - kPi / height * y;
  const double polar = kPi / 2.0 - elevation;
  RemapEntry e;
  if (polar < p.theta_min || polar > p.theta_max) return e;
  double r = p.coeffs.back();
  for (std::size_t i = p.coeffs.size() - 1; i-- > 0;) r = r * polar + p.coeffs[i];
  const double cx = r * std::cos(phi);
  const double cy = r * std::sin(phi);
  e.u = p.u0 + (p.affine[0] * cx + p.affine[1] * cy);
  e.v = p.v0 + (p.affine[2] * cx + p.affine[3] * cy);
  if (p.v_flip) e.v = (p.height - 1) - e.v;
  e.valid = e.u >= 0.0 && e.u <= p.width - 1.0 && e.v >= 0.0 && e.v <= p.height - 1.0;
  return e;
}

// ---------------------------------------------------------------- sampling

// Bilinear sample with explicit weights; returns nothing when the footprint
// leaves the image (columns wrap when `wrap`).
inline std::optional<std::vector<double>> bilinear(const panocc::ImagePlane& img, double u, double v,
                                                   bool wrap) {
  if (!(v >= 0.0 && v <= img.height - 1.0)) return std::nullopt;
  if (!wrap && !(u >= 0.0 && u <= img.width - 1.0)) return std::nullopt;
  const double x0 = std::floor(u);
  const double y0 = std::floor(v);
  const double ax = u - x0;
  const double ay = v - y0;
  std::vector<double> out(static_cast<std::size_t>(img.channels), 0.0);
  const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const long xs[4] = {static_cast<long>(x0), static_cast<long>(x0) + 1, static_cast<long>(x0),
                      static_cast<long>(x0) + 1};
  const long ys[4] = {static_cast<long>(y0), static_cast<long>(y0), static_cast<long>(y0) + 1,
                      static_cast<long>(y0) + 1};
  for (int t = 0; t < 4; ++t) {
    if (wts[t] == 0.0) continue;
    long x = xs[t];
    if (wrap) x = ((x % img.width) + img.width) % img.width;
    const std::size_t pix = static_cast<std::size_t>(ys[t]) * img.width + static_cast<std::size_t>(x);
    if (!img.is_valid(pix)) return std::nullopt;
    for (int c = 0; c < img.channels; ++c) out[c] += wts[t] * img.data[pix * img.channels + c];
  }
  return out;
}

struct OracleProjection {
  double u = 0.0, v = 0.0;
  bool valid = false;
};

inline OracleProjection project(const Vec3& p, panocc::View view, const panocc::CameraModel::Params& cam,
                                int width, int height) {
  const double rho = std::hypot(p.x, p.y);
  double phi = std::atan2(p.y, p.x);
  if (phi >= kPi) phi -= 2.0 * kPi;
  const double elevation = std::atan2(p.z, rho);
  const double polar = kPi / 2.0 - elevation;
  OracleProjection out;
  const bool in_range = polar >= cam.theta_min && polar <= cam.theta_max;
  if (view == panocc::View::Equi) {
    out.u = (phi + kPi) / (2.0 * kPi) * width;
    if (out.u >= width) out.u -= width;
    out.v = polar / kPi * height;
    out.valid = in_range && out.v >= 0.0 && out.v <= height - 1.0;
    return out;
  }
  const double r = poly_sum(cam.coeffs, polar);
  const double cx = r * std::cos(phi);
  const double cy = r * std::sin(phi);
  out.u = cam.u0 + cam.affine[0] * cx + cam.affine[1] * cy;
  out.v = cam.v0 + cam.affine[2] * cx + cam.affine[3] * cy;
  if (cam.v_flip) out.v = (cam.height - 1) - out.v;
  out.u = out.u * width / cam.width;
  out.v = out.v * height / cam.height;
  out.valid = in_range && out.u >= 0.0 && out.u <= width - 1.0 && out.v >= 0.0 && out.v <= height - 1.0;
  return out;
}

inline panocc::PixelOffset gdc(const panocc::FeaturePlane& plane, const panocc::GdcHead& head) {
  panocc::PixelOffset d{head.bias[0], head.bias[1]};
  for (int c = 0; c < plane.channels; ++c) {
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < plane.pixel_count(); ++i) {
      if (!plane.is_valid(i)) continue;
      sum += plane.data[i * plane.channels + c];
      count += 1.0;
    }
    d.dx += head.weights[c * 2] * (sum / count);
    d.dy += head.weights[c * 2 + 1] * (sum / count);
  }
  return d;
}

inline double snap(double x) { return std::nearbyint(x * 1048576.0) / 1048576.0; }

inline FeatureVolume lift(const panocc::GridSpec& grid, const std::vector<Vec3>& centroids, panocc::View view,
                          const panocc::CameraModel::Params& cam, const panocc::FeaturePlane& plane,
                          panocc::PixelOffset delta = {}) {
  FeatureVolume out(grid, plane.channels);
  for (std::size_t v = 0; v < centroids.size(); ++v) {
    out.valid[v] = 0;
    const OracleProjection pr = project(centroids[v], view, cam, plane.width, plane.height);
    if (!pr.valid) continue;
    const auto s = bilinear(plane, snap(pr.u + delta.dx), snap(pr.v + delta.dy), view == panocc::View::Equi);
    if (!s) continue;
    out.valid[v] = 1;
    std::copy(s->begin(), s->end(), out.at(v).begin());
  }
  return out;
}

inline FeatureVolume fuse(const std::vector<FeatureVolume>& vols, const std::vector<double>& logits) {
  FeatureVolume out(vols[0].grid, vols[0].channels);
  const std::size_t n = vols.size();
  for (std::size_t v = 0; v < out.voxel_count(); ++v) {
    double denom = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (vols[s].valid[v]) denom += std::exp(logits[v * n + s]);
    }
    out.valid[v] = denom > 0.0 ? 1 : 0;
    if (denom == 0.0) continue;
    for (int c = 0; c < out.channels; ++c) {
      double acc = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        if (vols[s].valid[v]) acc += std::exp(logits[v * n + s]) / denom * vols[s].at(v)[c];
      }
      out.at(v)[c] = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------- bigrid

inline std::size_t nearest_index(const std::vector<Vec3>& candidates, const Vec3& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    const double dx = candidates[m].x - p.x;
    const double dy = candidates[m].y - p.y;
    const double dz = candidates[m].z - p.z;
    const double d = dx * dx + dy * dy + dz * dz;
    // Exact ties (up to rounding) keep the lower index.
    if (d < best_d * (1.0 - 1e-12)) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

// A Cartesian centroid where containment and nearest-centroid disagree by
// construction: inside the radial Voronoi sliver between the inner arc
// r = r_e of its shell and the bisector r cos(dphi) = r_e of the two radially
// adjacent centroids (linear spacing). Points exactly on a face are not
// boundary cells: both searches send them to the lower index.
inline bool boundary_cell(const panocc::PolarGridSpec& po, const Vec3& p) {
  const double r = std::hypot(p.x, p.y);
  if (r <= po.r0 || r >= po.r1) return false;
  const double step_r = (po.r1 - po.r0) / po.nr;
  const double step_phi = 2.0 * kPi / po.nphi;
  const double phi = std::atan2(p.y, p.x);
  const double shell = std::floor((r - po.r0) / step_r);
  if (shell == 0.0) return false;
  const double r_e = po.r0 + shell * step_r;
  const double center = -kPi + (std::floor((phi + kPi) / step_phi) + 0.5) * step_phi;
  return r >= r_e && r * std::cos(phi - center) < r_e;
}

// ---------------------------------------------------------------- amoe3d

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline std::vector<double> affine(const panocc::PointwiseAffine& a, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(a.out));
  for (int o = 0; o < a.out; ++o) {
    y[o] = a.bias[o];
    for (int i = 0; i < a.in; ++i) y[o] += a.weights[o * a.in + i] * x[i];
  }
  return y;
}

inline std::vector<double> features(const FeatureVolume& x, std::size_t v) {
  const auto f = x.at(v);
  return {f.begin(), f.end()};
}

// Zero-padded cross-correlation, kernel [input][dz][dy][dx].
inline std::vector<double> conv3d(const std::vector<std::vector<double>>& maps, const GridDims& d,
                                  const std::vector<double>& kernel, std::size_t kernel_offset, double bias,
                                  int k) {
  const int r = k / 2;
  std::vector<double> out(d.count());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        double acc = bias;
        for (std::size_t m = 0; m < maps.size(); ++m) {
          for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
              for (int c = 0; c < k; ++c) {
                const long zz = static_cast<long>(z) + a - r;
                const long yy = static_cast<long>(y) + b - r;
                const long xx = static_cast<long>(x) + c - r;
                if (zz < 0 || yy < 0 || xx < 0 || zz >= static_cast<long>(d.nz) ||
                    yy >= static_cast<long>(d.ny) || xx >= static_cast<long>(d.nx)) {
                  continue;
                }
                const double w = kernel[kernel_offset + ((m * k + a) * k + b) * k + c];
                acc += w * maps[m][d.flat(xx, yy, zz)];
              }
            }
          }
        }
        out[d.flat(x, y, z)] = acc;
      }
    }
  }
  return out;
}

inline std::vector<double> mlp(const panocc::SaliencyParams& p, const std::vector<double>& x) {
  std::vector<double> h(static_cast<std::size_t>(p.hidden));
  for (int j = 0; j < p.hidden; ++j) {
    double acc = p.mlp_b1[j];
    for (int c = 0; c < p.channels; ++c) acc += p.mlp_w1[j * p.channels + c] * x[c];
    h[j] = acc > 0.0 ? acc : 0.0;
  }
  std::vector<double> y(static_cast<std::size_t>(p.channels));
  for (int c = 0; c < p.channels; ++c) {
    double acc = p.mlp_b2[c];
    for (int j = 0; j < p.hidden; ++j) acc += p.mlp_w2[c * p.hidden + j] * h[j];
    y[c] = acc;
  }
  return y;
}

inline std::vector<double> channel_gate(const FeatureVolume& x, const panocc::SaliencyParams& p) {
  std::vector<double> avg(x.channels, 0.0), mx(x.channels, -std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < x.voxel_count(); ++v) {
    for (int c = 0; c < x.channels; ++c) {
      avg[c] += x.at(v)[c];
      mx[c] = std::max(mx[c], x.at(v)[c]);
    }
  }
  for (auto& a : avg) a /= static_cast<double>(x.voxel_count());
  const auto ya = mlp(p, avg);
  const auto ym = mlp(p, mx);
  std::vector<double> g(x.channels);
  for (int c = 0; c < x.channels; ++c) g[c] = sigmoid(ya[c] + ym[c]);
  return g;
}

inline std::vector<double> spatial_gate(const FeatureVolume& x, const panocc::SaliencyParams& p) {
  std::vector<std::vector<double>> maps(2, std::vector<double>(x.voxel_count()));
  for (std::size_t v = 0; v < x.voxel_count(); ++v) {
    double s = 0.0, m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < x.channels; ++c) {
      s += x.at(v)[c];
      m = std::max(m, x.at(v)[c]);
    }
    maps[0][v] = s / x.channels;
    maps[1][v] = m;
  }
  auto g = conv3d(maps, x.dims(), p.spatial_kernel, 0, p.spatial_bias, panocc::SaliencyParams::kSpatialKernel);
  for (auto& e : g) e = sigmoid(e);
  return g;
}

// Sum over axes a of |grad_a Y|^2, accumulated term by term, axis-major.
inline std::vector<double> grad_energy(const FeatureVolume& y) {
  const GridDims d = y.dims();
  std::vector<double> e(d.count(), 0.0);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        const std::size_t v = d.flat(i, j, z);
        const bool has_next[3] = {i + 1 < d.nx, j + 1 < d.ny, z + 1 < d.nz};
        const std::size_t next[3] = {has_next[0] ? d.flat(i + 1, j, z) : v, has_next[1] ? d.flat(i, j + 1, z) : v,
                                     has_next[2] ? d.flat(i, j, z + 1) : v};
        for (int axis = 0; axis < 3; ++axis) {
          if (!has_next[axis]) continue;
          for (int c = 0; c < y.channels; ++c) {
            const double diff = y.at(next[axis])[c] - y.at(v)[c];
            e[v] += diff * diff;
          }
        }
      }
    }
  }
  return e;
}

inline std::vector<double> gates(const FeatureVolume& y, const panocc::MoeParams& p) {
  const std::size_t K = p.num_experts();
  const std::size_t taps = static_cast<std::size_t>(p.gate_kernel) * p.gate_kernel * p.gate_kernel;
  const std::vector<std::vector<double>> energy{grad_energy(y)};
  std::vector<std::vector<double>> logits;
  for (std::size_t k = 0; k < K; ++k) {
    logits.push_back(conv3d(energy, y.dims(), p.gate_weights, k * taps, p.gate_bias[k], p.gate_kernel));
  }
  std::vector<double> alpha(y.voxel_count() * K);
  for (std::size_t v = 0; v < y.voxel_count(); ++v) {
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) denom += std::exp(logits[k][v]);
    for (std::size_t k = 0; k < K; ++k) alpha[v * K + k] = std::exp(logits[k][v]) / denom;
  }
  return alpha;
}

inline FeatureVolume moe(const FeatureVolume& y, const panocc::MoeParams& p) {
  const auto alpha = oracle::gates(y, p);
  const std::size_t K = p.num_experts();
  FeatureVolume out = y;
  for (std::size_t v = 0; v < y.voxel_count(); ++v) {
    if (!y.valid[v]) continue;
    const auto in = features(y, v);
    for (std::size_t k = 0; k < K; ++k) {
      auto h = affine(p.experts[k].first, in);
      for (auto& e : h) e = gelu(e);
      const auto o = affine(p.experts[k].second, h);
      for (int c = 0; c < y.channels; ++c) out.at(v)[c] += alpha[v * K + k] * o[c];
    }
  }
  return out;
}

inline FeatureVolume amoe(const FeatureVolume& x, const panocc::SaliencyParams& s, const panocc::MoeParams& m) {
  const auto ac = oracle::channel_gate(x, s);
  const auto as = oracle::spatial_gate(x, s);
  FeatureVolume y = x;
  for (std::size_t v = 0; v < x.voxel_count(); ++v) {
    for (int c = 0; c < x.channels; ++c) y.at(v)[c] = x.at(v)[c] * ac[c] * as[v];
  }
  return oracle::moe(y, m);
}

inline FeatureVolume inject(const FeatureVolume& po, const std::vector<std::uint32_t>& table,
                            const FeatureVolume& ca, const panocc::PointwiseAffine& align) {
  FeatureVolume out(ca.grid, 2 * ca.channels);
  for (std::size_t v = 0; v < ca.voxel_count(); ++v) {
    const std::size_t src = table[v];
    out.valid[v] = (ca.valid[v] || po.valid[src]) ? 1 : 0;
    if (!out.valid[v]) continue;
    const auto a = affine(align, features(po, src));
    for (int c = 0; c < ca.channels; ++c) {
      out.at(v)[c] = a[c];
      out.at(v)[ca.channels + c] = ca.at(v)[c];
    }
  }
  return out;
}

inline FeatureVolume pointwise(const FeatureVolume& x, const panocc::PointwiseAffine& a) {
  FeatureVolume out(x.grid, a.out);
  out.valid = x.valid;
  for (std::size_t v = 0; v < x.voxel_count(); ++v) {
    if (!x.valid[v]) continue;
    const auto y = affine(a, features(x, v));
    std::copy(y.begin(), y.end(), out.at(v).begin());
  }
  return out;
}

// ---------------------------------------------------------------- ssc

inline std::vector<double> softmax(std::span<const double> z) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : z) m = std::max(m, x);
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) s += (p[c] = std::exp(z[c] - m));
  for (auto& x : p) x /= s;
  return p;
}

inline bool supervised(const panocc::LogitVolume& z, const panocc::OccupancyGrid& gt, std::size_t v) {
  return gt.labels[v] != panocc::kIgnoreLabel && z.is_valid(v);
}

inline double ce(const panocc::LogitVolume& z, const panocc::OccupancyGrid& gt, const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    if (!supervised(z, gt, v)) continue;
    const auto p = softmax(z.at(v));
    const double wc = w.empty() ? 1.0 : w[gt.labels[v]];
    num += -wc * std::log(p[gt.labels[v]]);
    den += wc;
  }
  return num / den;
}

inline double clamped_log(double x) { return x > 0.0 ? std::max(std::log(x), -100.0) : -100.0; }

// Per-class affinity over probability rows `probs` (n x classes).
inline double scal_rows(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels,
                        int classes) {
  double loss = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    double tp = 0.0, pred = 0.0, tn = 0.0;
    double pos = 0.0, neg = 0.0;
    for (std::size_t m = 0; m < labels.size(); ++m) {
      pred += probs[m][c];
      if (labels[m] == c) {
        tp += probs[m][c];
        pos += 1.0;
      } else {
        tn += 1.0 - probs[m][c];
        neg += 1.0;
      }
    }
    if (pos == 0.0) continue;
    ++present;
    if (pred > 0.0) loss -= clamped_log(tp / pred);
    loss -= clamped_log(tp / pos);
    if (neg > 0.0) loss -= clamped_log(tn / neg);
  }
  return loss / present;
}

inline double scal(const panocc::LogitVolume& z, const panocc::OccupancyGrid& gt, bool geometric) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    if (!supervised(z, gt, v)) continue;
    auto p = softmax(z.at(v));
    if (geometric) {
      double occ = 0.0;
      for (std::size_t c = 1; c < p.size(); ++c) occ += p[c];
      rows.push_back({p[0], occ});
      labels.push_back(gt.labels[v] == 0 ? 0 : 1);
    } else {
      rows.push_back(p);
      labels.push_back(gt.labels[v]);
    }
  }
  return scal_rows(rows, labels, geometric ? 2 : z.classes);
}

inline double fp(const panocc::LogitVolume& z, const panocc::OccupancyGrid& gt, int sectors) {
  const GridDims& d = z.dims;
  std::vector<std::vector<double>> qsum(sectors, std::vector<double>(z.classes, 0.0));
  std::vector<std::vector<double>> psum(sectors, std::vector<double>(z.classes, 0.0));
  std::vector<double> count(sectors, 0.0);
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        const std::size_t v = d.flat(i, j, k);
        if (!supervised(z, gt, v)) continue;
        double ang = std::atan2(j + 0.5 - d.ny / 2.0, i + 0.5 - d.nx / 2.0);
        if (ang >= kPi) ang -= 2.0 * kPi;
        int s = static_cast<int>(std::floor((ang + kPi) / (2.0 * kPi) * sectors));
        s = std::clamp(s, 0, sectors - 1);
        const auto p = softmax(z.at(v));
        for (int c = 0; c < z.classes; ++c) psum[s][c] += p[c];
        qsum[s][gt.labels[v]] += 1.0;
        count[s] += 1.0;
      }
    }
  }
  double loss = 0.0;
  int used = 0;
  for (int s = 0; s < sectors; ++s) {
    if (count[s] == 0.0) continue;
    ++used;
    for (int c = 0; c < z.classes; ++c) {
      const double q = qsum[s][c] / count[s];
      if (q == 0.0) continue;
      loss += q * (std::log(q) - clamped_log(psum[s][c] / count[s]));
    }
  }
  return loss / used;
}

struct Confusion {
  std::vector<std::vector<std::uint64_t>> m;  // [gt][pred]
};

inline Confusion confusion(const panocc::OccupancyGrid& pred, const panocc::OccupancyGrid& gt, int classes) {
  Confusion out{std::vector<std::vector<std::uint64_t>>(classes, std::vector<std::uint64_t>(classes, 0))};
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    if (gt.labels[v] == panocc::kIgnoreLabel || pred.labels[v] == panocc::kIgnoreLabel) continue;
    ++out.m[gt.labels[v]][pred.labels[v]];
  }
  return out;
}

}  // namespace oracle
