// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [--cli <panocc>] [--golden <dir>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <unistd.h>

#include "cli_golden.hpp"
#include "gen.hpp"
#include "oracles.hpp"
#include "panocc/amoe3d.hpp"
#include "panocc/bigrid.hpp"
#include "panocc/lifting.hpp"
#include "panocc/parallel.hpp"
#include "panocc/ssc.hpp"
#include "panocc/synth.hpp"
#include "panocc/unwrap.hpp"

using namespace panocc;
namespace fs = std::filesystem;

namespace {

// Collects the first failure of a criterion.
struct Verdict {
  std::string failure;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

MoeParams random_moe(gen::Gen& g, int channels, int experts) {
  MoeParams p = MoeParams::zeros(channels, experts);
  for (auto& e : p.experts) {
    e.first.weights = g.vec(e.first.weights.size(), -0.5, 0.5);
    e.first.bias = g.vec(e.first.bias.size(), -0.2, 0.2);
    e.second.weights = g.vec(e.second.weights.size(), -0.5, 0.5);
    e.second.bias = g.vec(e.second.bias.size(), -0.2, 0.2);
  }
  p.gate_weights = g.vec(p.gate_weights.size(), -0.5, 0.5);
  p.gate_bias = g.vec(p.gate_bias.size(), -0.5, 0.5);
  return p;
}

LogitVolume saturated(const OccupancyGrid& gt, int classes) {
  LogitVolume z;
  z.dims = gt.dims;
  z.classes = classes;
  z.data.assign(gt.voxel_count() * classes, -40.0);
  for (std::size_t v = 0; v < gt.voxel_count(); ++v) {
    if (gt.labels[v] != kIgnoreLabel) z.data[v * classes + gt.labels[v]] = 40.0;
  }
  return z;
}

// ------------------------------------------------------------------------

void camera_round_trip(Verdict& r) {
  CameraModel::Params p = fixture_camera().params();
  p.coeffs = {0.0, 310.0, -12.0, 0.8};
  p.theta_min = 0.2;
  p.theta_max = 2.6;
  const CameraModel m(p);
  gen::Gen g(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double theta = g.uniform(p.theta_min, p.theta_max);
    worst = std::max(worst, std::abs(m.invert_radial(m.radial_distance(theta)) - theta));
  }
  r.require(worst < 1e-8, "max error " + fmt("%.3g", worst));
  r.note = "max |error| " + fmt("%.2g", worst) + " rad";
}

void remap_oracle(Verdict& r) {
  const CameraModel m = fixture_camera();
  const RemapTable t = build_remap(256, 128, m);
  std::size_t mismatched = 0, valid = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 256; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 256 + x;
      const auto e = oracle::remap_entry(m.params(), 256, 128, x, y);
      valid += e.valid;
      mismatched += (t.valid[i] != 0) != e.valid || (e.valid && (t.src_u[i] != e.u || t.src_v[i] != e.v));
    }
  }
  r.require(mismatched == 0, std::to_string(mismatched) + " table entries differ from the oracle");
  r.require(valid > 0, "no valid pixels");
  const ImagePlane raw(m.raw_width(), m.raw_height(), 3, 0.625);
  const ImagePlane out = apply_remap(raw, t, -1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      r.require(out.data[i * 3 + c] == (t.valid[i] ? 0.625 : -1.0), "constant image not preserved");
    }
  }
  r.note = std::to_string(valid) + " valid entries bit-exact";
}

void cross_grid(Verdict& r) {
  const CartesianGridSpec ca{16, 16, 4, -3.2, -3.2, -0.8, 0.4, 0.4, 0.4};
  PolarGridSpec po = PolarGridSpec::default_for(ca);
  po.nphi = 16;
  r.require(po.dims() == GridDims{8, 16, 4}, "polar grid is not 8 x 16 x 4");
  const CrossIndexTable table = build_cross_indices(ca, po, 1);
  const auto pc = polar_centroids(po);
  const auto cc = cartesian_centroids(ca);
  std::size_t boundary = 0, checked = 0, mismatched = 0;
  for (std::size_t v = 0; v < cc.size(); ++v) {
    if (oracle::boundary_cell(po, cc[v])) {
      ++boundary;
      continue;
    }
    ++checked;
    mismatched += table.indices[v] != oracle::nearest_index(pc, cc[v]);
  }
  r.require(mismatched == 0, std::to_string(mismatched) + " non-boundary cells disagree");
  r.require(boundary * 20 <= cc.size(), std::to_string(boundary) + " boundary cells exceed 5%");
  r.note = std::to_string(checked) + " cells agree, " + std::to_string(boundary) + " boundary (" +
           fmt("%.1f", 100.0 * boundary / cc.size()) + "%)";
}

void zero_gdc(Verdict& r) {
  const SynthScene s = make_fixture(0, FixturePreset::Clutter);
  std::vector<Vec3> pts = cartesian_centroids(s.grid);
  for (auto& p : pts) p = s.pose.apply(p);
  const CameraModel m = fixture_camera();
  for (int scale : {1, 4}) {
    const FeaturePlane plane(render_equi(s, 1024 / scale, 512 / scale), scale, View::Equi);
    const PixelOffset d = gdc_offset(plane, GdcHead::zero_initialized(plane.channels));
    r.require(d.dx == 0.0 && d.dy == 0.0, "zero head predicts a nonzero offset");
    const FeatureVolume a = lift_volume(s.grid, pts, View::Equi, m, plane);
    const FeatureVolume b = lift_volume(s.grid, pts, View::Equi, m, plane, d);
    r.require(a.data == b.data && a.valid == b.valid, "lifted volumes differ at scale " + std::to_string(scale));
  }
  r.note = "clutter fixture, scales 1 and 4";
}

void convex_fusion(Verdict& r) {
  gen::Gen g(5);
  for (int t = 0; t < 100; ++t) {
    const auto grid = gen::small_grid(g.integer(1, 5), g.integer(1, 5), g.integer(1, 3));
    const int scales = g.integer(1, 4), channels = g.integer(1, 4);
    std::vector<FeatureVolume> vols;
    for (int s = 0; s < scales; ++s) vols.push_back(gen::volume(g, grid, channels, -5, 5, 0.3));
    const ScaleWeights w{static_cast<std::size_t>(scales), g.vec(grid.count() * scales, -4, 4)};
    const FeatureVolume f = fuse_scales(vols, w);
    for (std::size_t v = 0; v < grid.count(); ++v) {
      std::vector<std::uint8_t> valid;
      for (const auto& vol : vols) valid.push_back(vol.valid[v]);
      const auto alpha = convex_weights(std::span(w.logits).subspan(v * scales, scales), valid);
      const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
      if (!f.valid[v]) continue;
      r.require(std::abs(sum - 1.0) < 1e-6, "weights sum to " + fmt("%.17g", sum));
      for (int c = 0; c < channels; ++c) {
        double lo = 1e300, hi = -1e300;
        for (const auto& vol : vols) {
          if (!vol.valid[v]) continue;
          lo = std::min(lo, vol.at(v)[c]);
          hi = std::max(hi, vol.at(v)[c]);
        }
        r.require(f.at(v)[c] >= lo && f.at(v)[c] <= hi, "fused value leaves the envelope");
      }
    }
  }
  r.note = "100 random cases";
}

void grad_energy(Verdict& r) {
  gen::Gen g(6);
  FeatureVolume flat(gen::small_grid(4, 3, 5), 3);
  std::fill(flat.data.begin(), flat.data.end(), 1.7);
  for (double e : grad_energy3d(flat)) r.require(e == 0.0, "constant volume has energy");

  // Unit ramp along x, y and z: energy 3 inside, one less per last slice.
  FeatureVolume ramp(gen::small_grid(4, 4, 4), 1);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t i = 0; i < 4; ++i) ramp.at((k * 4 + j) * 4 + i)[0] = static_cast<double>(i + j + k);
    }
  }
  const auto e = grad_energy3d(ramp);
  for (std::size_t v = 0; v < 64; ++v) {
    const std::size_t i = v % 4, j = (v / 4) % 4, k = v / 16;
    r.require(e[v] == static_cast<double>((i < 3) + (j < 3) + (k < 3)), "ramp energy is not analytic");
  }

  double worst_fd = 0.0, worst_scale = 0.0;
  for (int t = 0; t < 20; ++t) {
    FeatureVolume y = gen::volume(g, gen::small_grid(4, 4, 4), 2, -1, 1);
    const auto grad = grad_energy3d_gradient(y);
    const double h = 1e-4;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      const double keep = y.data[i];
      y.data[i] = keep + h;
      const auto ep = grad_energy3d(y);
      y.data[i] = keep - h;
      const auto em = grad_energy3d(y);
      y.data[i] = keep;
      const double fd = (std::accumulate(ep.begin(), ep.end(), 0.0) - std::accumulate(em.begin(), em.end(), 0.0)) / (2 * h);
      worst_fd = std::max(worst_fd, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    const double s = g.uniform(0.1, 10.0);
    FeatureVolume ys = y;
    for (double& x : ys.data) x *= s;
    const auto e0 = grad_energy3d(y), es = grad_energy3d(ys);
    for (std::size_t v = 0; v < e0.size(); ++v) {
      worst_scale = std::max(worst_scale, std::abs(es[v] - s * s * e0[v]) / std::max(1.0, es[v]));
    }
  }
  r.require(worst_fd <= 1e-4, "finite-difference error " + fmt("%.3g", worst_fd));
  r.require(worst_scale <= 1e-6, "scaling error " + fmt("%.3g", worst_scale));
  r.note = "fd error " + fmt("%.2g", worst_fd) + ", scaling error " + fmt("%.2g", worst_scale);
}

void moe_gating(Verdict& r) {
  gen::Gen g(7);
  for (int t = 0; t < 20; ++t) {
    const int c = g.integer(1, 4), k = g.integer(1, 6);
    const auto grid = gen::small_grid(g.integer(1, 5), g.integer(1, 5), g.integer(1, 5));
    const FeatureVolume y = gen::volume(g, grid, c, -2, 2);
    const MoeParams p = random_moe(g, c, k);
    const auto alpha = moe_gates(y, p);
    for (std::size_t v = 0; v < grid.count(); ++v) {
      double sum = 0.0;
      for (int e = 0; e < k; ++e) {
        r.require(alpha[v * k + e] > 0.0, "non-positive gate");
        sum += alpha[v * k + e];
      }
      r.require(std::abs(sum - 1.0) < 1e-6, "gates do not sum to one");
    }
    MoeParams zero = p;
    std::fill(zero.gate_weights.begin(), zero.gate_weights.end(), 0.0);
    std::fill(zero.gate_bias.begin(), zero.gate_bias.end(), 0.0);
    for (double a : moe_gates(y, zero)) r.require(std::abs(a - 1.0 / k) <= 1e-9, "zero gating is not uniform");

    // Reverse the experts together with their gating rows.
    MoeParams perm = p;
    const std::size_t row = p.gate_weights.size() / static_cast<std::size_t>(k);
    for (int e = 0; e < k; ++e) {
      const int src = k - 1 - e;
      perm.experts[e] = p.experts[src];
      perm.gate_bias[e] = p.gate_bias[src];
      std::copy_n(p.gate_weights.begin() + src * row, row, perm.gate_weights.begin() + e * row);
    }
    const FeatureVolume a = moe_fuse(y, p), b = moe_fuse(y, perm);
    r.require(a.data == b.data, "expert permutation changes the output");
  }
  r.note = "20 random blocks";
}

void loss_suite(Verdict& r) {
  gen::Gen g(8);
  const GridDims d{4, 4, 2};
  double worst = 0.0;
  for (int c : {2, 3, 5, 17}) {
    const OccupancyGrid labels = gen::labels(g, d, c, 0.2);
    LogitVolume uniform;
    uniform.dims = d;
    uniform.classes = c;
    uniform.data.assign(d.count() * c, 0.3);
    r.require(std::abs(ce_loss(uniform, labels) - std::log(static_cast<double>(c))) < 1e-9, "uniform CE != ln C");
  }
  for (int t = 0; t < 50; ++t) {
    const int c = g.integer(2, 6);
    const OccupancyGrid gt = gen::labels(g, d, c, 0.15);
    const LogitVolume z = gen::logits(g, d, c, 4.0);
    const auto w = g.vec(static_cast<std::size_t>(c), 0.2, 3.0);
    const std::size_t sectors = static_cast<std::size_t>(g.integer(1, 8));
    const LossBreakdown b = total_loss(z, gt, {w, sectors});
    const double rel[3] = {b.ce / oracle::ce(z, gt, w) - 1, b.scal_sem / oracle::scal(z, gt, false) - 1,
                           b.scal_geo / oracle::scal(z, gt, true) - 1};
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(rel[i]));
    worst = std::max(worst, std::abs(b.fp - oracle::fp(z, gt, static_cast<int>(sectors))) /
                                std::max(1.0, std::abs(b.fp)));
    const LossBreakdown s = total_loss(saturated(gt, c), gt, {w, 8});
    r.require(s.ce < 1e-5 && s.scal_sem < 1e-5 && s.scal_geo < 1e-5 && std::abs(s.fp) < 1e-5,
              "saturated prediction leaves a loss above 1e-5");
    r.require(std::abs(fp_loss(saturated(gt, c), gt, 8)) < 1e-9, "KL identity is not zero");
  }
  r.require(worst < 1e-6, "oracle mismatch " + fmt("%.3g", worst));
  r.note = "max oracle deviation " + fmt("%.2g", worst);
}

void metrics_suite(Verdict& r) {
  const GridDims d{2, 2, 1};
  OccupancyGrid gt(d), pred(d);
  gt.labels = {1, 0, 1, kIgnoreLabel};
  pred.labels = {1, 1, 0, 1};
  const SscReport h = ssc_metrics(pred, gt, 2);
  r.require(h.tp == std::vector<std::uint64_t>{0, 1} && h.fp == std::vector<std::uint64_t>{1, 1} &&
                h.fn == std::vector<std::uint64_t>{1, 1},
            "hand-tallied confusion differs");
  r.require(h.miou == 1.0 / 3.0 && h.precision == 0.5 && h.recall == 0.5 && h.geom_iou == 1.0 / 3.0,
            "hand-tallied scores differ");
  gen::Gen g(9);
  for (int t = 0; t < 30; ++t) {
    const int c = g.integer(2, 8);
    const GridDims dd{5, 4, 3};
    const OccupancyGrid a = gen::labels(g, dd, c, 0.1), b = gen::labels(g, dd, c, 0.1);
    const SscReport same = ssc_metrics(a, a, c);
    bool any = false;
    for (auto l : a.labels) any |= l != 0 && l != kIgnoreLabel;
    if (any) r.require(same.miou == 1.0, "pred = gt does not give mIoU 1");
    const SscReport ab = ssc_metrics(a, b, c), ba = ssc_metrics(b, a, c);
    r.require(ab.precision == ba.recall && ab.recall == ba.precision, "swap does not exchange P and R");
  }
  r.note = "2x2x1 fixture plus 30 random swaps";
}

void end_to_end(Verdict& r) {
  const SynthScene scene = make_fixture(2, FixturePreset::Ring);
  const CameraModel m = fixture_camera();
  const int w = 1024, h = 512;
  {
    const FeaturePlane plane = render_equi(scene, w, h);
    std::vector<Vec3> pts = cartesian_centroids(scene.grid);
    for (auto& p : pts) p = scene.pose.apply(p);
    const FeatureVolume v = lift_volume(scene.grid, pts, View::Equi, m, plane);
    std::size_t visible = 0, good = 0;
    for (std::size_t i = 0; i < scene.grid.count(); ++i) {
      const auto label = scene.occupancy.labels[i];
      if (label == 0 || !voxel_visible(scene, i)) continue;
      ++visible;
      double err = v.valid[i] ? 0.0 : 1e300;
      for (int c = 0; c < scene.feature_dim && v.valid[i]; ++c) {
        err = std::max(err, std::abs(v.at(i)[c] - scene.palette_row(label)[c]));
      }
      good += err <= 0.15;
    }
    r.require(visible > 0 && good * 10 >= visible * 9,
              "palette recovered on " + std::to_string(good) + " / " + std::to_string(visible));
    r.note = "palette on " + std::to_string(good) + "/" + std::to_string(visible) + " visible voxels";
  }
  const PolarGridSpec po = PolarGridSpec::default_for(scene.grid);
  const std::vector<Vec3> pts = polar_centroids(po);
  const FeatureVolume v0 = lift_volume(po, pts, View::Equi, m, render_equi(scene, w, h));
  SynthScene turned = scene;
  turned.pose = RigidTransform::rotation_z(2 * oracle::kPi / static_cast<double>(po.nphi));
  const FeatureVolume v1 = lift_volume(po, pts, View::Equi, m, render_equi(turned, w, h));
  std::size_t mismatched = 0;
  for (std::size_t k = 0; k < po.nz; ++k) {
    for (std::size_t q = 0; q < po.nphi; ++q) {
      for (std::size_t p = 0; p < po.nr; ++p) {
        const std::size_t a = po.dims().flat(p, q, k), b = po.dims().flat(p, (q + 1) % po.nphi, k);
        mismatched += v0.valid[a] != v1.valid[b];
        for (int c = 0; c < v0.channels; ++c) mismatched += v0.at(a)[c] != v1.at(b)[c];
      }
    }
  }
  r.require(mismatched == 0, std::to_string(mismatched) + " entries differ from the one-bin roll");
  r.note += ", one-bin roll exact over " + std::to_string(po.nphi) + " sectors";
}

void determinism(Verdict& r, const std::string& cli, const fs::path& golden) {
  if (cli.empty()) {
    r.require(false, "no --cli given");
    return;
  }
  const fs::path base = fs::temp_directory_path() / ("panocc_accept_" + std::to_string(::getpid()));
  std::size_t runs = 0;
  for (int threads : {1, 8, 1, 8}) {
    for (const auto& o : golden::run_suite(cli, golden, threads, base / std::to_string(runs))) {
      r.require(o.ok, o.name + " --threads " + std::to_string(threads) + ": " + o.detail);
    }
    ++runs;
  }
  fs::remove_all(base);
  r.note = std::to_string(golden::commands().size()) + " golden commands x " + std::to_string(runs) + " runs";
}

void throughput(Verdict& r) {
  const CameraModel m = fixture_camera();
  ImagePlane raw(m.raw_width(), m.raw_height(), 3);
  for (std::size_t i = 0; i < raw.data.size(); ++i) raw.data[i] = static_cast<double>(i % 251) / 250.0;
  const RemapTable t = build_remap(1216, 608, m);
  apply_remap(raw, t);  // warm-up
  std::vector<double> ms;
  for (int rep = 0; rep < 7; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const ImagePlane out = apply_remap(raw, t);
    ms.push_back(seconds_since(t0) * 1e3);
    r.require(out.width == 1216 && out.height == 608, "wrong output size");
  }
  std::sort(ms.begin(), ms.end());
  r.require(ms[3] < 100.0, "median " + fmt("%.1f", ms[3]) + " ms");
  r.note = "median " + fmt("%.2f", ms[3]) + " ms over 7 runs, " + std::to_string(num_threads()) + " threads";
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path golden_dir;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") cli = fs::absolute(argv[i + 1]).string();
    if (key == "--golden") golden_dir = argv[i + 1];
  }

  struct Criterion {
    const char* name;
    double budget_s;  // 0: untimed
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria{
      {"camera round trip", 1.0, camera_round_trip},
      {"remap oracle", 1.0, remap_oracle},
      {"cross-grid oracle", 5.0, cross_grid},
      {"zero-init GDC identity", 0.0, zero_gdc},
      {"convex fusion", 0.0, convex_fusion},
      {"GradEnergy3D", 0.0, grad_energy},
      {"MoE gating", 0.0, moe_gating},
      {"loss suite", 0.0, loss_suite},
      {"metrics suite", 0.0, metrics_suite},
      {"end-to-end round trip", 30.0, end_to_end},
      {"determinism", 0.0, [&](Verdict& r) { determinism(r, cli, golden_dir); }},
      {"throughput", 0.0, throughput},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double s = seconds_since(t0);
    if (c.budget_s > 0.0) v.require(s < c.budget_s, "took " + fmt("%.2f", s) + " s, budget " + fmt("%.0f s", c.budget_s));
    const bool ok = v.failure.empty();
    failed += !ok;
    std::printf("%s %2zu %-24s %7.3f s  %s\n", ok ? "PASS" : "FAIL", i + 1, c.name, s,
                ok ? v.note.c_str() : v.failure.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
