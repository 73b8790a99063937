// Regenerates tests/golden: CLI inputs plus expected outputs computed with
// the scalar oracles from tests/oracles.hpp.
//
//   make_goldens <golden-dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "panocc/config.hpp"
#include "panocc/synth.hpp"
#include "panocc/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace panocc;

namespace {

std::mt19937_64 rng(20240601);

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

void randomize(std::vector<double>& v, double scale) {
  for (auto& x : v) x = uniform(-scale, scale);
}

FeaturePlane read_plane(const fs::path& p, int scale) {
  return FeaturePlane(image_from_tensor(read_ptns(p)), scale, View::Equi);
}

void write_volume(const fs::path& dir, const std::string& stem, const FeatureVolume& v) {
  write_ptns(dir / (stem + ".ptns"), tensor_from_volume(v));
  write_ptns(dir / (stem + "_mask.ptns"), tensor_from_voxel_mask(v.dims(), v.valid));
}

FeatureVolume read_volume(const fs::path& dir, const std::string& stem, const GridSpec& grid) {
  FeatureVolume v = volume_from_tensor(read_ptns(dir / (stem + ".ptns")), grid);
  v.valid = voxel_mask_from_tensor(read_ptns(dir / (stem + "_mask.ptns")), v.dims());
  return v;
}

void unwrap_case(const fs::path& in, const fs::path& out) {
  CameraModel::Params cam;
  cam.coeffs = {0.0, 30.0, -1.5};
  cam.u0 = 47.25;
  cam.v0 = 48.5;
  cam.affine = {1.0, 0.002, -0.001, 0.998};
  cam.theta_min = 0.35;
  cam.theta_max = 2.2;
  cam.width = 96;
  cam.height = 96;
  save_calibration(in / "unwrap_calibration.json", cam);
  cam = load_calibration(in / "unwrap_calibration.json");

  Tensor raw{{96, 96, 3}, DType::F32, {}};
  for (std::uint32_t i = 0; i < 96 * 96 * 3; ++i) raw.values.push_back(static_cast<float>(uniform(0.0, 1.0)));
  write_ptns(in / "raw.ptns", raw);
  const ImagePlane img = image_from_tensor(read_ptns(in / "raw.ptns"));

  const int w = 160, h = 80;
  const double fill = -1.0;
  ImagePlane equi(w, h, 3, fill);
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto e = oracle::remap_entry(cam, w, h, x, y);
      if (!e.valid) continue;
      const auto s = oracle::bilinear(img, e.u, e.v, false);
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      valid[pix] = 1;
      std::copy(s->begin(), s->end(), equi.data.begin() + static_cast<std::ptrdiff_t>(pix * 3));
    }
  }
  write_ptns(out / "unwrap.ptns", tensor_from_image(equi));
  write_ptns(out / "unwrap_mask.ptns", mask_tensor(w, h, valid));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_goldens <golden-dir>\n";
    return 2;
  }
  const fs::path root(argv[1]);
  const fs::path in = root / "inputs";
  const fs::path out = root / "expected";
  fs::create_directories(in / "params");
  fs::create_directories(out);

  unwrap_case(in, out);

  // Scene, two feature planes and a manifest.
  const SynthScene scene = make_fixture(7, FixturePreset::Clutter);
  const CameraModel::Params cam = fixture_camera().params();
  save_calibration(in / "calibration.json", cam);
  write_ptns(in / "features_s1.ptns", tensor_from_image(render_equi(scene, 128, 64)));
  write_ptns(in / "features_s2.ptns", tensor_from_image(render_equi(scene, 64, 32)));
  write_ptns(in / "gt.ptns", tensor_from_grid(scene.occupancy));

  const GridDims dims = scene.grid.dims();
  OccupancyGrid pred = scene.occupancy;
  std::vector<std::uint8_t> mask(dims.count(), 1);
  for (std::size_t v = 0; v < dims.count(); ++v) {
    if (uniform(0, 1) < 0.1) pred.labels[v] = static_cast<std::uint8_t>(rng() % 4);
    if (uniform(0, 1) < 0.05) mask[v] = 0;
  }
  write_ptns(in / "prediction.ptns", tensor_from_grid(pred));
  write_ptns(in / "mask.ptns", tensor_from_voxel_mask(dims, mask));

  Manifest m;
  m.dataset = "golden";
  m.split = "clutter7";
  m.cartesian = scene.grid;
  m.polar = PolarGridSpec::default_for(scene.grid);
  m.calibration = "calibration.json";
  m.pose = scene.pose;
  m.classes = {{0, "empty", 0.8}, {1, "floor", 0.1}, {2, "solid_a", 0.06}, {3, "solid_b", 0.04}};
  FrameEntry f;
  f.id = "0";
  f.features = {{"features_s1.ptns", 1, View::Equi, ""}, {"features_s2.ptns", 2, View::Equi, ""}};
  f.gt = "gt.ptns";
  f.mask = "mask.ptns";
  f.prediction = "prediction.ptns";
  m.frames = {f};
  save_manifest(in / "manifest.json", m);

  // GDC head.
  GdcHead head = GdcHead::zero_initialized(3);
  head.weights = {0.75, -0.5, -1.25, 0.25, 0.5, 1.0};
  head.bias = {0.375, -0.625};
  save_gdc_head(in / "gdc_w.ptns", in / "gdc_b.ptns", head);
  head = load_gdc_head(in / "gdc_w.ptns", in / "gdc_b.ptns");

  const std::vector<FeaturePlane> planes{read_plane(in / "features_s1.ptns", 1),
                                         read_plane(in / "features_s2.ptns", 2)};
  auto lift_all = [&](const GridSpec& grid, std::vector<Vec3> pts, bool gdc) {
    for (auto& p : pts) p = m.pose.apply(p);
    std::vector<FeatureVolume> vols;
    for (const auto& plane : planes) {
      const PixelOffset d = gdc ? oracle::gdc(plane, head) : PixelOffset{};
      vols.push_back(oracle::lift(grid, pts, View::Equi, cam, plane, d));
    }
    return oracle::fuse(vols, std::vector<double>(pts.size() * planes.size(), 0.0));
  };
  write_volume(out, "lift_cartesian", lift_all(m.cartesian, cartesian_centroids(m.cartesian), true));
  write_volume(out, "lift_polar", lift_all(m.polar, polar_centroids(m.polar), false));

  // Fuse with random parameters on the stored lift outputs.
  FuseParams params = default_fuse_params(3, 3);
  randomize(params.align.weights, 0.5);
  randomize(params.align.bias, 0.1);
  auto& sal = params.level.saliency;
  randomize(sal.mlp_w1, 0.5);
  randomize(sal.mlp_b1, 0.1);
  randomize(sal.mlp_w2, 0.5);
  randomize(sal.mlp_b2, 0.1);
  randomize(sal.spatial_kernel, 0.2);
  sal.spatial_bias = 0.25;
  auto& moe = params.level.moe;
  randomize(moe.gate_weights, 0.3);
  randomize(moe.gate_bias, 0.1);
  for (auto& e : moe.experts) {
    randomize(e.first.weights, 0.4);
    randomize(e.first.bias, 0.1);
    randomize(e.second.weights, 0.4);
    randomize(e.second.bias, 0.1);
  }
  randomize(params.level.reduce->weights, 0.5);
  randomize(params.level.reduce->bias, 0.1);
  save_fuse_params(in / "params", params);
  params = load_fuse_params(in / "params");

  const FeatureVolume ca = read_volume(out, "lift_cartesian", m.cartesian);
  const FeatureVolume po = read_volume(out, "lift_polar", m.polar);
  std::vector<std::uint32_t> table(m.cartesian.count());
  const auto pc = cartesian_centroids(m.cartesian);
  for (std::size_t v = 0; v < table.size(); ++v) table[v] = static_cast<std::uint32_t>(polar_index_of(m.polar, pc[v]));
  const FeatureVolume injected = oracle::inject(po, table, ca, params.align);
  write_volume(out, "fuse",
               oracle::pointwise(oracle::amoe(injected, params.level.saliency, params.level.moe), *params.level.reduce));

  // Evaluation report.
  OccupancyGrid gt = scene.occupancy;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (!mask[v]) gt.labels[v] = kIgnoreLabel;
  }
  const auto cm = oracle::confusion(pred, gt, 4).m;
  json per_class = json::array();
  double iou_sum = 0.0;
  int present = 0;
  std::uint64_t gtp = 0, gfp = 0, gfn = 0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a > 0 && b > 0) gtp += cm[a][b];
      if (a == 0 && b > 0) gfp += cm[a][b];
      if (a > 0 && b == 0) gfn += cm[a][b];
    }
  }
  for (int c = 1; c < 4; ++c) {
    std::uint64_t row = 0, col = 0;
    for (int o = 0; o < 4; ++o) {
      row += cm[c][o];
      col += cm[o][c];
    }
    const std::uint64_t tp = cm[c][c];
    const double iou = static_cast<double>(tp) / static_cast<double>(row + col - tp);
    if (row > 0) {
      iou_sum += iou;
      ++present;
    }
    per_class.push_back({{"id", c},
                         {"name", m.classes[c].name},
                         {"iou", iou},
                         {"present", row > 0},
                         {"tp", tp},
                         {"fp", col - tp},
                         {"fn", row - tp}});
  }
  const json report = {{"manifest", "manifest.json"},
                       {"dataset", m.dataset},
                       {"split", m.split},
                       {"frames", 1},
                       {"miou", iou_sum / present},
                       {"iou_geo", static_cast<double>(gtp) / static_cast<double>(gtp + gfp + gfn)},
                       {"precision", static_cast<double>(gtp) / static_cast<double>(gtp + gfp)},
                       {"recall", static_cast<double>(gtp) / static_cast<double>(gtp + gfn)},
                       {"per_class", per_class}};
  std::ofstream(out / "eval.json") << json{{"reports", json::array({report})}}.dump(2) << "\n";
  std::cout << "goldens written to " << root.string() << "\n";
  return 0;
}
