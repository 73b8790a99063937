// panocc: file-in/file-out driver for the panoramic occupancy pipeline.
//
// Exit status: 0 success, 1 computation error, 2 usage or I/O error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "panocc/amoe3d.hpp"
#include "panocc/bigrid.hpp"
#include "panocc/camera.hpp"
#include "panocc/config.hpp"
#include "panocc/error.hpp"
#include "panocc/lifting.hpp"
#include "panocc/parallel.hpp"
#include "panocc/ssc.hpp"
#include "panocc/synth.hpp"
#include "panocc/tensor_io.hpp"
#include "panocc/unwrap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace panocc;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::Format:
    case ErrorCode::UnknownPreset:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimMismatch:
    case ErrorCode::GridMismatch:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::LevelMismatch:
      return 2;
    default:
      return 1;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::vector<Vec3> camera_centroids(const GridSpec& grid, const RigidTransform& pose) {
  std::vector<Vec3> pts = std::visit(
      [](const auto& g) {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, PolarGridSpec>) {
          return polar_centroids(g);
        } else {
          return cartesian_centroids(g);
        }
      },
      grid);
  for (auto& p : pts) p = pose.apply(p);
  return pts;
}

const FrameEntry& pick_frame(const Manifest& m, const std::string& id) {
  if (m.frames.empty()) throw Error(ErrorCode::Format, "manifest has no frames");
  if (id.empty()) return m.frames.front();
  for (const auto& f : m.frames) {
    if (f.id == id) return f;
  }
  throw Error(ErrorCode::Format, "manifest has no frame '" + id + "'");
}

FeatureVolume read_volume(const fs::path& path, const std::string& mask_path, const GridSpec& grid) {
  FeatureVolume v = volume_from_tensor(read_ptns(path), grid);
  if (!mask_path.empty()) v.valid = voxel_mask_from_tensor(read_ptns(mask_path), v.dims());
  return v;
}

void write_volume(const FeatureVolume& v, const fs::path& out, const std::string& mask_out) {
  write_ptns(out, tensor_from_volume(v));
  if (!mask_out.empty()) write_ptns(mask_out, tensor_from_voxel_mask(v.dims(), v.valid));
}

// ---------------------------------------------------------------- unwrap

struct UnwrapArgs {
  std::string calibration, input, out, mask_out;
  int width = 0, height = 0;
  double fill = 0.0;
};

void run_unwrap(const UnwrapArgs& a) {
  const CameraModel model(load_calibration(a.calibration));
  const ImagePlane raw = image_from_tensor(read_ptns(a.input));
  const RemapTable table = build_remap(a.width, a.height, model);
  const ImagePlane equi = apply_remap(raw, table, a.fill);
  write_ptns(a.out, tensor_from_image(equi));
  if (!a.mask_out.empty()) write_ptns(a.mask_out, mask_tensor(a.width, a.height, table.valid));
  const auto valid = std::count(table.valid.begin(), table.valid.end(), 1);
  std::cout << "unwrap: " << a.width << "x" << a.height << "x" << equi.channels << ", " << valid
            << " valid pixels\n";
}

// ---------------------------------------------------------------- voxelize

struct VoxelizeArgs {
  std::string manifest, out_dir;
  std::vector<int> levels{1, 2, 4};
};

void run_voxelize(const VoxelizeArgs& a) {
  const Manifest m = load_manifest(a.manifest);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  for (int level : a.levels) {
    if (!is_supported_level(level)) {
      throw Error(ErrorCode::InvalidArgument, "level must be 1, 2 or 4, got " + std::to_string(level));
    }
    const auto tag = "_l" + std::to_string(level);
    const auto ca = cartesian_centroids(m.cartesian.at_level(level));
    const auto po = polar_centroids(m.polar.at_level(level));
    write_ptns(dir / ("cartesian_centroids" + tag + ".ptns"), tensor_from_points(ca));
    write_ptns(dir / ("polar_centroids" + tag + ".ptns"), tensor_from_points(po));
    const CrossIndexTable table = build_cross_indices(m.cartesian, m.polar, level);
    write_ptns(dir / ("cross" + tag + ".ptns"), tensor_from_cross_table(table));
    std::cout << "level " << level << ": " << ca.size() << " cartesian, " << po.size()
              << " polar cells\n";
  }
}

// ---------------------------------------------------------------- lift

struct LiftArgs {
  std::string manifest, frame, grid = "cartesian", out, mask_out;
  std::string gdc_weights, gdc_bias, scale_logits;
  int level = 1;
};

void run_lift(const LiftArgs& a) {
  const Manifest m = load_manifest(a.manifest);
  const FrameEntry& frame = pick_frame(m, a.frame);
  if (frame.features.empty()) throw Error(ErrorCode::Format, "frame '" + frame.id + "' lists no feature planes");
  if (!is_supported_level(a.level)) throw Error(ErrorCode::InvalidArgument, "level must be 1, 2 or 4");
  if (a.gdc_weights.empty() != a.gdc_bias.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--gdc-weights and --gdc-bias go together");
  }
  const GridSpec grid = a.grid == "polar" ? GridSpec(m.polar.at_level(a.level))
                                          : GridSpec(m.cartesian.at_level(a.level));
  const CameraModel model(load_calibration(m.resolve(m.calibration)));
  std::optional<GdcHead> head;
  if (!a.gdc_weights.empty()) head = load_gdc_head(a.gdc_weights, a.gdc_bias);

  const auto centroids = camera_centroids(grid, m.pose);
  std::vector<FeatureVolume> lifted;
  for (const auto& ref : frame.features) {
    FeaturePlane plane(image_from_tensor(read_ptns(m.resolve(ref.path))), ref.scale, ref.view);
    if (!ref.mask.empty()) {
      plane.valid = voxel_mask_from_tensor(
          read_ptns(m.resolve(ref.mask)),
          GridDims{static_cast<std::size_t>(plane.width), static_cast<std::size_t>(plane.height), 1});
    }
    std::optional<PixelOffset> delta;
    if (head) delta = gdc_offset(plane, *head);
    lifted.push_back(lift_volume(grid, centroids, ref.view, model, plane, delta));
  }

  ScaleWeights weights = ScaleWeights::uniform(grid_dims(grid).count(), lifted.size());
  if (!a.scale_logits.empty()) {
    const Tensor t = read_ptns(a.scale_logits);
    if (t.values.size() != weights.logits.size()) {
      throw Error(ErrorCode::DimMismatch, "scale logits must hold voxels x planes values");
    }
    weights.logits = t.values;
  }
  const FeatureVolume fused = fuse_scales(lifted, weights);
  write_volume(fused, a.out, a.mask_out);
  const auto valid = std::count(fused.valid.begin(), fused.valid.end(), 1);
  std::cout << "lift: " << lifted.size() << " plane(s), " << valid << "/" << fused.voxel_count()
            << " voxels valid\n";
}

// ---------------------------------------------------------------- fuse

struct FuseArgs {
  std::string manifest, polar, polar_mask, cartesian, cartesian_mask, params, out, mask_out;
  int level = 1;
};

void run_fuse(const FuseArgs& a) {
  const Manifest m = load_manifest(a.manifest);
  if (!is_supported_level(a.level)) throw Error(ErrorCode::InvalidArgument, "level must be 1, 2 or 4");
  const FeatureVolume v_po = read_volume(a.polar, a.polar_mask, m.polar.at_level(a.level));
  const FeatureVolume v_ca = read_volume(a.cartesian, a.cartesian_mask, m.cartesian.at_level(a.level));
  const FuseParams params = a.params.empty() ? default_fuse_params(v_ca.channels) : load_fuse_params(a.params);

  const CrossIndexTable table = build_cross_indices(m.cartesian, m.polar, a.level);
  const FeatureVolume injected = inject_polar(v_po, table, v_ca, params.align);
  HierarchicalAmoe3d block;
  block.set_level(a.level, params.level);
  const FeatureVolume out = block.forward(a.level, injected);
  write_volume(out, a.out, a.mask_out);
  std::cout << "fuse: level " << a.level << ", " << out.voxel_count() << " voxels x " << out.channels
            << " channels\n";
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> manifests;
  std::string json_out;
  bool losses = false;
};

OccupancyGrid read_labels(const fs::path& path, const GridDims& expected) {
  OccupancyGrid g = grid_from_tensor(read_ptns(path));
  if (!(g.dims == expected)) {
    throw Error(ErrorCode::Format, path.string() + ": grid is " + std::to_string(g.dims.nx) + "x" +
                                       std::to_string(g.dims.ny) + "x" + std::to_string(g.dims.nz) +
                                       ", manifest declares " + std::to_string(expected.nx) + "x" +
                                       std::to_string(expected.ny) + "x" + std::to_string(expected.nz));
  }
  return g;
}

json evaluate_manifest(const fs::path& path, bool with_losses, std::ostream& text) {
  const Manifest m = load_manifest(path);
  const int classes = static_cast<int>(m.classes.size());
  if (classes < 2) throw Error(ErrorCode::Format, path.string() + ": need at least two classes");
  const GridDims dims = m.cartesian.dims();
  SscMetrics metrics(classes);
  LossConfig loss_config;
  loss_config.class_weights = inverse_log_class_weights(m.class_frequencies());
  LossBreakdown loss_sum;
  std::size_t frames = 0, loss_frames = 0;

  for (const auto& f : m.frames) {
    if (f.gt.empty() || (f.prediction.empty() && f.logits.empty())) continue;
    OccupancyGrid gt = read_labels(m.resolve(f.gt), dims);
    if (!f.mask.empty()) {
      const auto mask = voxel_mask_from_tensor(read_ptns(m.resolve(f.mask)), dims);
      for (std::size_t v = 0; v < mask.size(); ++v) {
        if (!mask[v]) gt.labels[v] = kIgnoreLabel;
      }
    }
    std::optional<LogitVolume> logits;
    if (!f.logits.empty()) {
      logits = logits_from_tensor(read_ptns(m.resolve(f.logits)));
      if (!(logits->dims == dims) || logits->classes != classes) {
        throw Error(ErrorCode::Format, m.resolve(f.logits).string() + ": logits do not match the manifest");
      }
    }
    const OccupancyGrid pred =
        f.prediction.empty() ? argmax_labels(*logits) : read_labels(m.resolve(f.prediction), dims);
    metrics.add(pred, gt);
    ++frames;
    if (with_losses && logits) {
      const LossBreakdown l = total_loss(*logits, gt, loss_config);
      loss_sum.ce += l.ce;
      loss_sum.scal_sem += l.scal_sem;
      loss_sum.scal_geo += l.scal_geo;
      loss_sum.fp += l.fp;
      loss_sum.total += l.total;
      ++loss_frames;
    }
  }
  if (frames == 0) throw Error(ErrorCode::Format, path.string() + ": no frame has both gt and a prediction");

  const SscReport r = metrics.report();
  json per_class = json::array();
  for (int c = 1; c < classes; ++c) {
    const auto i = static_cast<std::size_t>(c);
    per_class.push_back({{"id", c},
                         {"name", m.classes[i].name},
                         {"iou", r.per_class_iou[i - 1]},
                         {"present", r.class_present[i - 1] != 0},
                         {"tp", r.tp[i]},
                         {"fp", r.fp[i]},
                         {"fn", r.fn[i]}});
  }
  json report = {{"manifest", path.string()},
                 {"dataset", m.dataset},
                 {"split", m.split},
                 {"frames", frames},
                 {"miou", r.miou},
                 {"iou_geo", r.geom_iou},
                 {"precision", r.precision},
                 {"recall", r.recall},
                 {"per_class", std::move(per_class)}};

  char line[160];
  text << m.dataset << (m.split.empty() ? "" : " / " + m.split) << " (" << frames << " frame(s))\n";
  std::snprintf(line, sizeof line, "  mIoU %.4f  IoU %.4f  precision %.4f  recall %.4f\n", r.miou,
                r.geom_iou, r.precision, r.recall);
  text << line;
  for (int c = 1; c < classes; ++c) {
    const auto i = static_cast<std::size_t>(c);
    std::snprintf(line, sizeof line, "  %-16s %.4f%s\n", m.classes[i].name.c_str(), r.per_class_iou[i - 1],
                  r.class_present[i - 1] ? "" : "  (absent)");
    text << line;
  }
  if (with_losses && loss_frames > 0) {
    const double n = static_cast<double>(loss_frames);
    report["losses"] = {{"ce", loss_sum.ce / n},
                        {"scal_sem", loss_sum.scal_sem / n},
                        {"scal_geo", loss_sum.scal_geo / n},
                        {"fp", loss_sum.fp / n},
                        {"total", loss_sum.total / n}};
    std::snprintf(line, sizeof line, "  loss %.6f (ce %.6f  scal_sem %.6f  scal_geo %.6f  fp %.6f)\n",
                  loss_sum.total / n, loss_sum.ce / n, loss_sum.scal_sem / n, loss_sum.scal_geo / n,
                  loss_sum.fp / n);
    text << line;
  }
  return report;
}

void run_eval(const EvalArgs& a) {
  json reports = json::array();
  for (const auto& path : a.manifests) reports.push_back(evaluate_manifest(path, a.losses, std::cout));
  if (!a.json_out.empty()) write_text(a.json_out, json{{"reports", reports}}.dump(2) + "\n");
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  int reps = 5;
  int width = 1216;
  int height = 608;
  int channels = 3;
  std::string json_out;
};

struct Stats {
  double min = 0, mean = 0, median = 0, max = 0;
};

Stats summarize(std::vector<double> ms) {
  std::sort(ms.begin(), ms.end());
  Stats s;
  s.min = ms.front();
  s.max = ms.back();
  s.mean = pairwise_sum(ms) / static_cast<double>(ms.size());
  const std::size_t h = ms.size() / 2;
  s.median = ms.size() % 2 ? ms[h] : 0.5 * (ms[h - 1] + ms[h]);
  return s;
}

template <typename Fn>
std::vector<double> time_reps(int reps, Fn&& fn) {
  std::vector<double> ms;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return ms;
}

void run_bench(const BenchArgs& a) {
  const CameraModel model = fixture_camera();
  const int rw = model.raw_width(), rh = model.raw_height();
  ImagePlane raw(rw, rh, a.channels);
  for (std::size_t i = 0; i < raw.data.size(); ++i) raw.data[i] = static_cast<double>(i % 251) / 250.0;

  RemapTable table;
  ImagePlane equi;
  const SynthScene scene = make_fixture(0, FixturePreset::Clutter);
  const FeaturePlane plane = render_equi(scene, a.width / 4, a.height / 4);
  const GridSpec grid = scene.grid;
  const auto centroids = camera_centroids(grid, scene.pose);
  FeatureVolume lifted;
  const MoeParams moe = MoeParams::zeros(scene.feature_dim);
  const SaliencyParams saliency = SaliencyParams::zeros(scene.feature_dim);

  std::vector<std::pair<std::string, std::vector<double>>> stages;
  stages.emplace_back("build_remap", time_reps(a.reps, [&] { table = build_remap(a.width, a.height, model); }));
  stages.emplace_back("apply_remap", time_reps(a.reps, [&] { equi = apply_remap(raw, table); }));
  stages.emplace_back("lift", time_reps(a.reps, [&] {
                        lifted = lift_volume(grid, centroids, View::Equi, model, plane);
                      }));
  stages.emplace_back("fuse", time_reps(a.reps, [&] { lifted = amoe3d_forward(lifted, saliency, moe); }));

  json out = json::object();
  std::cout << "bench: " << a.reps << " rep(s), " << a.width << "x" << a.height << "x" << a.channels
            << ", " << num_threads() << " thread(s)\n";
  char line[160];
  for (const auto& [name, ms] : stages) {
    const Stats s = summarize(ms);
    std::snprintf(line, sizeof line, "  %-12s min %9.3f  mean %9.3f  median %9.3f  max %9.3f ms\n",
                  name.c_str(), s.min, s.mean, s.median, s.max);
    std::cout << line;
    out[name] = {{"min_ms", s.min}, {"mean_ms", s.mean}, {"median_ms", s.median}, {"max_ms", s.max}};
  }
  if (!a.json_out.empty()) write_text(a.json_out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------- fixtures

struct FixtureArgs {
  std::string preset = "clutter", out_dir;
  std::uint64_t seed = 0;
  int width = 256, height = 128;
};

void run_fixtures(const FixtureArgs& a) {
  const SynthScene scene = make_fixture(a.seed, a.preset);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  save_calibration(dir / "calibration.json", fixture_camera().params());
  write_ptns(dir / "gt.ptns", tensor_from_grid(scene.occupancy));
  write_ptns(dir / "prediction.ptns", tensor_from_grid(scene.occupancy));
  write_ptns(dir / "features.ptns", tensor_from_image(render_equi(scene, a.width, a.height)));

  Manifest m;
  m.dataset = "synthetic-" + a.preset;
  m.split = "seed" + std::to_string(a.seed);
  m.cartesian = scene.grid;
  m.polar = PolarGridSpec::default_for(scene.grid);
  m.calibration = "calibration.json";
  m.pose = scene.pose;
  const char* names[] = {"empty", "floor", "solid_a", "solid_b"};
  std::vector<std::size_t> counts(static_cast<std::size_t>(scene.num_classes), 0);
  for (auto l : scene.occupancy.labels) ++counts[l];
  for (int c = 0; c < scene.num_classes; ++c) {
    m.classes.push_back({c, names[c],
                         static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                             static_cast<double>(scene.occupancy.voxel_count())});
  }
  FrameEntry f;
  f.id = "0";
  f.features.push_back({"features.ptns", 1, View::Equi, ""});
  f.gt = "gt.ptns";
  f.prediction = "prediction.ptns";
  m.frames.push_back(f);
  save_manifest(dir / "manifest.json", m);
  std::cout << "fixtures: " << a.preset << " seed " << a.seed << " -> " << (dir / "manifest.json").string()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoramic semantic occupancy pipeline tools"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: PANOCC_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  UnwrapArgs ua;
  auto* unwrap = app.add_subcommand("unwrap", "Raw annular image -> equirectangular PTNS");
  unwrap->add_option("--calibration", ua.calibration, "Calibration JSON")->required();
  unwrap->add_option("--input", ua.input, "Raw image PTNS (H, W[, C])")->required();
  unwrap->add_option("--width", ua.width, "Output width")->required()->check(CLI::Range(2, 1 << 16));
  unwrap->add_option("--height", ua.height, "Output height")->required()->check(CLI::Range(2, 1 << 16));
  unwrap->add_option("--out", ua.out, "Output image PTNS")->required();
  unwrap->add_option("--mask-out", ua.mask_out, "Output validity mask PTNS (u8)");
  unwrap->add_option("--fill", ua.fill, "Value of invalid pixels");

  VoxelizeArgs va;
  auto* voxelize = app.add_subcommand("voxelize", "Write grid centroids and cross-grid index tables");
  voxelize->add_option("--manifest", va.manifest, "Dataset manifest")->required();
  voxelize->add_option("--out-dir", va.out_dir, "Output directory")->required();
  voxelize->add_option("--levels", va.levels, "Stride levels (1, 2, 4)");

  LiftArgs la;
  auto* lift = app.add_subcommand("lift", "Lift a frame's feature planes into a voxel volume");
  lift->add_option("--manifest", la.manifest, "Dataset manifest")->required();
  lift->add_option("--frame", la.frame, "Frame id (default: first frame)");
  lift->add_option("--grid", la.grid, "Target grid")->check(CLI::IsMember({"cartesian", "polar"}));
  lift->add_option("--level", la.level, "Stride level (1, 2, 4)");
  lift->add_option("--gdc-weights", la.gdc_weights, "GDC head weights PTNS (C, 2)");
  lift->add_option("--gdc-bias", la.gdc_bias, "GDC head bias PTNS (2)");
  lift->add_option("--scale-logits", la.scale_logits, "Per-voxel scale logits PTNS (voxels x planes)");
  lift->add_option("--out", la.out, "Output volume PTNS (nz, ny, nx, C)")->required();
  lift->add_option("--mask-out", la.mask_out, "Output voxel validity PTNS (u8)");

  FuseArgs fa;
  auto* fuse = app.add_subcommand("fuse", "Polar injection and AMoE-3D on stored volumes");
  fuse->add_option("--manifest", fa.manifest, "Dataset manifest (grid specs)")->required();
  fuse->add_option("--polar", fa.polar, "Polar volume PTNS")->required();
  fuse->add_option("--polar-mask", fa.polar_mask, "Polar voxel validity PTNS");
  fuse->add_option("--cartesian", fa.cartesian, "Cartesian volume PTNS")->required();
  fuse->add_option("--cartesian-mask", fa.cartesian_mask, "Cartesian voxel validity PTNS");
  fuse->add_option("--params", fa.params, "Parameter directory (default: zero-initialized)");
  fuse->add_option("--level", fa.level, "Stride level (1, 2, 4)");
  fuse->add_option("--out", fa.out, "Output volume PTNS")->required();
  fuse->add_option("--mask-out", fa.mask_out, "Output voxel validity PTNS (u8)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth, one table per manifest");
  eval->add_option("--manifest", ea.manifests, "Dataset manifest(s)")->required();
  eval->add_option("--json", ea.json_out, "Write the report as JSON");
  eval->add_flag("--losses", ea.losses, "Also report losses for frames with logits");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time remap, lift and fuse");
  bench->add_option("--reps", ba.reps, "Repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--width", ba.width, "Panorama width")->check(CLI::Range(2, 1 << 16));
  bench->add_option("--height", ba.height, "Panorama height")->check(CLI::Range(2, 1 << 16));
  bench->add_option("--channels", ba.channels, "Raw image channels")->check(CLI::Range(1, 64));
  bench->add_option("--json", ba.json_out, "Write timings as JSON");

  FixtureArgs xa;
  auto* fixtures = app.add_subcommand("fixtures", "Write a synthetic scene with manifest");
  fixtures->add_option("--preset", xa.preset, "corridor, ring or clutter");
  fixtures->add_option("--seed", xa.seed, "Scene seed");
  fixtures->add_option("--width", xa.width, "Rendered panorama width")->check(CLI::Range(2, 1 << 14));
  fixtures->add_option("--height", xa.height, "Rendered panorama height")->check(CLI::Range(2, 1 << 14));
  fixtures->add_option("--out-dir", xa.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) set_num_threads(threads);
    if (*unwrap) run_unwrap(ua);
    else if (*voxelize) run_voxelize(va);
    else if (*lift) run_lift(la);
    else if (*fuse) run_fuse(fa);
    else if (*eval) run_eval(ea);
    else if (*bench) run_bench(ba);
    else if (*fixtures) run_fixtures(xa);
  } catch (const Error& e) {
    std::cerr << "panocc: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "panocc: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "panocc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
