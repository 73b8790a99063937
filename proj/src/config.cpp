#include "panocc/config.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "panocc/error.hpp"
#include "panocc/tensor_io.hpp"

namespace panocc {
namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

template <typename T>
T field(const json& j, const char* key, const std::filesystem::path& source) {
  if (!j.contains(key)) throw Error(ErrorCode::Format, source.string() + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, source.string() + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::filesystem::path& source) {
  return j.contains(key) ? field<T>(j, key, source) : fallback;
}

json cartesian_to_json(const CartesianGridSpec& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"x0", g.x0}, {"y0", g.y0},
          {"z0", g.z0}, {"dx", g.dx}, {"dy", g.dy}, {"dz", g.dz}};
}

CartesianGridSpec cartesian_from_json(const json& j, const std::filesystem::path& src) {
  CartesianGridSpec g;
  g.nx = field<std::size_t>(j, "nx", src);
  g.ny = field<std::size_t>(j, "ny", src);
  g.nz = field<std::size_t>(j, "nz", src);
  g.x0 = field<double>(j, "x0", src);
  g.y0 = field<double>(j, "y0", src);
  g.z0 = field<double>(j, "z0", src);
  g.dx = field<double>(j, "dx", src);
  g.dy = field<double>(j, "dy", src);
  g.dz = field<double>(j, "dz", src);
  return g;
}

json polar_to_json(const PolarGridSpec& g) {
  return {{"nr", g.nr}, {"nphi", g.nphi}, {"nz", g.nz}, {"r0", g.r0}, {"r1", g.r1},
          {"z0", g.z0}, {"dz", g.dz}, {"spacing", to_string(g.spacing)}};
}

PolarGridSpec polar_from_json(const json& j, const std::filesystem::path& src) {
  PolarGridSpec g;
  g.nr = field<std::size_t>(j, "nr", src);
  g.nphi = field<std::size_t>(j, "nphi", src);
  g.nz = field<std::size_t>(j, "nz", src);
  g.r0 = field<double>(j, "r0", src);
  g.r1 = field<double>(j, "r1", src);
  g.z0 = field<double>(j, "z0", src);
  g.dz = field<double>(j, "dz", src);
  try {
    g.spacing = radial_spacing_from_string(field_or<std::string>(j, "spacing", "linear", src));
  } catch (const Error& e) {
    throw Error(ErrorCode::Format, src.string() + ": " + e.what());
  }
  return g;
}

void require_file(const Manifest& m, const std::string& rel, const char* what) {
  if (rel.empty()) return;
  const auto p = m.resolve(rel);
  if (!std::filesystem::is_regular_file(p)) {
    throw Error(ErrorCode::Io, std::string(what) + " not found: " + p.string());
  }
}

void write_vec(const std::filesystem::path& dir, json& roles, const std::string& role,
               std::vector<std::uint32_t> dims, const std::vector<double>& values) {
  const std::string file = role + ".ptns";
  write_ptns(dir / file, Tensor{std::move(dims), DType::F32, values});
  roles[role] = file;
}

std::vector<double> read_vec(const std::filesystem::path& dir, const json& roles,
                             const std::string& role, std::size_t expected) {
  if (!roles.contains(role)) {
    throw Error(ErrorCode::Format, (dir / "params.json").string() + ": missing tensor '" + role + "'");
  }
  const Tensor t = read_ptns(dir / roles.at(role).get<std::string>());
  if (t.values.size() != expected) {
    throw Error(ErrorCode::Format, "tensor '" + role + "' has " + std::to_string(t.values.size()) +
                                       " elements, expected " + std::to_string(expected));
  }
  return t.values;
}

void write_affine(const std::filesystem::path& dir, json& roles, const std::string& role,
                  const PointwiseAffine& a) {
  write_vec(dir, roles, role + ".weight",
            {static_cast<std::uint32_t>(a.out), static_cast<std::uint32_t>(a.in)}, a.weights);
  write_vec(dir, roles, role + ".bias", {static_cast<std::uint32_t>(a.out)}, a.bias);
}

PointwiseAffine read_affine(const std::filesystem::path& dir, const json& roles,
                            const std::string& role, int in, int out) {
  PointwiseAffine a = PointwiseAffine::zeros(in, out);
  a.weights = read_vec(dir, roles, role + ".weight", static_cast<std::size_t>(in) * out);
  a.bias = read_vec(dir, roles, role + ".bias", static_cast<std::size_t>(out));
  return a;
}

}  // namespace

CameraModel::Params load_calibration(const std::filesystem::path& path) {
  const json j = read_json(path);
  CameraModel::Params p;
  p.coeffs = field<std::vector<double>>(j, "a", path);
  p.u0 = field<double>(j, "u0", path);
  p.v0 = field<double>(j, "v0", path);
  const auto a = field<std::vector<double>>(j, "A", path);
  if (a.size() != 4) throw Error(ErrorCode::Format, path.string() + ": 'A' must hold 4 numbers");
  std::copy(a.begin(), a.end(), p.affine.begin());
  p.theta_min = field<double>(j, "theta_min", path);
  p.theta_max = field<double>(j, "theta_max", path);
  p.width = field<int>(j, "w_raw", path);
  p.height = field<int>(j, "h_raw", path);
  p.v_flip = field_or<bool>(j, "v_flip", false, path);
  return p;
}

void save_calibration(const std::filesystem::path& path, const CameraModel::Params& p) {
  write_json(path, {{"a", p.coeffs},
                    {"u0", p.u0},
                    {"v0", p.v0},
                    {"A", p.affine},
                    {"theta_min", p.theta_min},
                    {"theta_max", p.theta_max},
                    {"w_raw", p.width},
                    {"h_raw", p.height},
                    {"v_flip", p.v_flip}});
}

std::vector<double> Manifest::class_frequencies() const {
  std::vector<double> f;
  f.reserve(classes.size());
  for (const auto& c : classes) f.push_back(c.frequency);
  return f;
}

void Manifest::validate() const {
  try {
    cartesian.validate();
    polar.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Format, std::string("manifest grid: ") + e.what());
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].id != static_cast<int>(c)) {
      throw Error(ErrorCode::Format, "manifest class ids must be dense from 0; entry " +
                                         std::to_string(c) + " has id " +
                                         std::to_string(classes[c].id));
    }
  }
  require_file(*this, calibration, "calibration");
  for (const auto& f : frames) {
    require_file(*this, f.panorama, "panorama");
    require_file(*this, f.gt, "ground truth");
    require_file(*this, f.mask, "mask");
    require_file(*this, f.prediction, "prediction");
    require_file(*this, f.logits, "logits");
    for (const auto& plane : f.features) {
      require_file(*this, plane.path, "feature plane");
      require_file(*this, plane.mask, "feature mask");
    }
  }
}

bool operator==(const Manifest& a, const Manifest& b) {
  return a.dataset == b.dataset && a.split == b.split && a.cartesian == b.cartesian &&
         a.polar == b.polar && a.calibration == b.calibration && a.pose == b.pose &&
         a.classes == b.classes && a.frames == b.frames;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json(path);
  Manifest m;
  m.base_dir = path.parent_path();
  m.dataset = field<std::string>(j, "dataset", path);
  m.split = field_or<std::string>(j, "split", "", path);
  m.cartesian = cartesian_from_json(field<json>(j, "cartesian", path), path);
  m.polar = polar_from_json(field<json>(j, "polar", path), path);
  m.calibration = field_or<std::string>(j, "calibration", "", path);
  if (j.contains("pose")) {
    const json pose = j.at("pose");
    const auto r = field<std::vector<double>>(pose, "rotation", path);
    const auto t = field<std::vector<double>>(pose, "translation", path);
    if (r.size() != 9 || t.size() != 3) {
      throw Error(ErrorCode::Format, path.string() + ": pose needs 9 rotation and 3 translation values");
    }
    std::copy(r.begin(), r.end(), m.pose.rotation.begin());
    m.pose.translation = {t[0], t[1], t[2]};
  }
  for (const auto& c : field_or<json>(j, "classes", json::array(), path)) {
    m.classes.push_back({field<int>(c, "id", path), field<std::string>(c, "name", path),
                         field_or<double>(c, "frequency", 0.0, path)});
  }
  for (const auto& f : field_or<json>(j, "frames", json::array(), path)) {
    FrameEntry e;
    e.id = field_or<std::string>(f, "id", "", path);
    e.panorama = field_or<std::string>(f, "panorama", "", path);
    e.gt = field_or<std::string>(f, "gt", "", path);
    e.mask = field_or<std::string>(f, "mask", "", path);
    e.prediction = field_or<std::string>(f, "prediction", "", path);
    e.logits = field_or<std::string>(f, "logits", "", path);
    for (const auto& p : field_or<json>(f, "features", json::array(), path)) {
      PlaneRef ref;
      ref.path = field<std::string>(p, "path", path);
      ref.scale = field_or<int>(p, "scale", 1, path);
      try {
        ref.view = view_from_string(field_or<std::string>(p, "view", "equi", path));
      } catch (const Error& err) {
        throw Error(ErrorCode::Format, path.string() + ": " + err.what());
      }
      ref.mask = field_or<std::string>(p, "mask", "", path);
      e.features.push_back(std::move(ref));
    }
    m.frames.push_back(std::move(e));
  }
  m.validate();
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  json classes = json::array();
  for (const auto& c : m.classes) {
    classes.push_back({{"id", c.id}, {"name", c.name}, {"frequency", c.frequency}});
  }
  json frames = json::array();
  for (const auto& f : m.frames) {
    json planes = json::array();
    for (const auto& p : f.features) {
      json jp = {{"path", p.path}, {"scale", p.scale}, {"view", to_string(p.view)}};
      if (!p.mask.empty()) jp["mask"] = p.mask;
      planes.push_back(std::move(jp));
    }
    json jf = {{"id", f.id}};
    if (!f.panorama.empty()) jf["panorama"] = f.panorama;
    if (!planes.empty()) jf["features"] = std::move(planes);
    if (!f.gt.empty()) jf["gt"] = f.gt;
    if (!f.mask.empty()) jf["mask"] = f.mask;
    if (!f.prediction.empty()) jf["prediction"] = f.prediction;
    if (!f.logits.empty()) jf["logits"] = f.logits;
    frames.push_back(std::move(jf));
  }
  const Vec3& t = m.pose.translation;
  write_json(path, {{"dataset", m.dataset},
                    {"split", m.split},
                    {"cartesian", cartesian_to_json(m.cartesian)},
                    {"polar", polar_to_json(m.polar)},
                    {"calibration", m.calibration},
                    {"pose", {{"rotation", m.pose.rotation}, {"translation", {t.x, t.y, t.z}}}},
                    {"classes", std::move(classes)},
                    {"frames", std::move(frames)}});
}

GdcHead load_gdc_head(const std::filesystem::path& weights, const std::filesystem::path& bias) {
  const Tensor w = read_ptns(weights);
  const Tensor b = read_ptns(bias);
  if (w.dims.size() != 2 || w.dims[1] != 2) {
    throw Error(ErrorCode::Format, weights.string() + ": GDC weights must be (C, 2)");
  }
  if (b.values.size() != 2) throw Error(ErrorCode::Format, bias.string() + ": GDC bias must hold 2 values");
  GdcHead head = GdcHead::zero_initialized(static_cast<int>(w.dims[0]));
  head.weights = w.values;
  head.bias = {b.values[0], b.values[1]};
  return head;
}

void save_gdc_head(const std::filesystem::path& weights, const std::filesystem::path& bias,
                   const GdcHead& head) {
  write_ptns(weights, Tensor{{static_cast<std::uint32_t>(head.channels), 2}, DType::F32, head.weights});
  write_ptns(bias, Tensor{{2}, DType::F32, {head.bias[0], head.bias[1]}});
}

FuseParams load_fuse_params(const std::filesystem::path& dir) {
  const auto index = dir / "params.json";
  const json j = read_json(index);
  const int channels = field<int>(j, "channels", index);
  const int hidden = field<int>(j, "hidden", index);
  const int experts = field<int>(j, "experts", index);
  const int gate_kernel = field<int>(j, "gate_kernel", index);
  const bool has_reduce = field_or<bool>(j, "reduce", false, index);
  const json roles = field<json>(j, "tensors", index);
  if (channels <= 0 || hidden <= 0 || experts <= 0 || gate_kernel <= 0 || gate_kernel % 2 == 0) {
    throw Error(ErrorCode::Format, index.string() + ": bad sizes");
  }
  const int fused = 2 * channels;
  const auto k3 = static_cast<std::size_t>(gate_kernel) * gate_kernel * gate_kernel;
  constexpr std::size_t s3 = static_cast<std::size_t>(SaliencyParams::kSpatialKernel) *
                             SaliencyParams::kSpatialKernel * SaliencyParams::kSpatialKernel;

  FuseParams p;
  p.align = read_affine(dir, roles, "align", channels, channels);
  auto& sal = p.level.saliency;
  sal.channels = fused;
  sal.hidden = hidden;
  sal.mlp_w1 = read_vec(dir, roles, "saliency.mlp_w1", static_cast<std::size_t>(hidden) * fused);
  sal.mlp_b1 = read_vec(dir, roles, "saliency.mlp_b1", static_cast<std::size_t>(hidden));
  sal.mlp_w2 = read_vec(dir, roles, "saliency.mlp_w2", static_cast<std::size_t>(fused) * hidden);
  sal.mlp_b2 = read_vec(dir, roles, "saliency.mlp_b2", static_cast<std::size_t>(fused));
  sal.spatial_kernel = read_vec(dir, roles, "saliency.spatial_kernel", 2 * s3);
  sal.spatial_bias = read_vec(dir, roles, "saliency.spatial_bias", 1)[0];
  auto& moe = p.level.moe;
  moe.channels = fused;
  moe.gate_kernel = gate_kernel;
  moe.gate_weights = read_vec(dir, roles, "moe.gate_weights", static_cast<std::size_t>(experts) * k3);
  moe.gate_bias = read_vec(dir, roles, "moe.gate_bias", static_cast<std::size_t>(experts));
  for (int k = 0; k < experts; ++k) {
    const std::string base = "moe.expert" + std::to_string(k);
    moe.experts.push_back({read_affine(dir, roles, base + ".first", fused, fused),
                           read_affine(dir, roles, base + ".second", fused, fused)});
  }
  if (has_reduce) p.level.reduce = read_affine(dir, roles, "reduce", fused, channels);
  sal.validate();
  moe.validate();
  return p;
}

void save_fuse_params(const std::filesystem::path& dir, const FuseParams& p) {
  std::filesystem::create_directories(dir);
  const auto& sal = p.level.saliency;
  const auto& moe = p.level.moe;
  const auto fused = static_cast<std::uint32_t>(sal.channels);
  const auto hidden = static_cast<std::uint32_t>(sal.hidden);
  const auto k = static_cast<std::uint32_t>(moe.gate_kernel);
  constexpr auto s = static_cast<std::uint32_t>(SaliencyParams::kSpatialKernel);
  json roles = json::object();
  write_affine(dir, roles, "align", p.align);
  write_vec(dir, roles, "saliency.mlp_w1", {hidden, fused}, sal.mlp_w1);
  write_vec(dir, roles, "saliency.mlp_b1", {hidden}, sal.mlp_b1);
  write_vec(dir, roles, "saliency.mlp_w2", {fused, hidden}, sal.mlp_w2);
  write_vec(dir, roles, "saliency.mlp_b2", {fused}, sal.mlp_b2);
  write_vec(dir, roles, "saliency.spatial_kernel", {2, s, s, s}, sal.spatial_kernel);
  write_vec(dir, roles, "saliency.spatial_bias", {1}, {sal.spatial_bias});
  write_vec(dir, roles, "moe.gate_weights",
            {static_cast<std::uint32_t>(moe.num_experts()), k, k, k}, moe.gate_weights);
  write_vec(dir, roles, "moe.gate_bias", {static_cast<std::uint32_t>(moe.num_experts())},
            moe.gate_bias);
  for (std::size_t e = 0; e < moe.num_experts(); ++e) {
    const std::string base = "moe.expert" + std::to_string(e);
    write_affine(dir, roles, base + ".first", moe.experts[e].first);
    write_affine(dir, roles, base + ".second", moe.experts[e].second);
  }
  if (p.level.reduce) write_affine(dir, roles, "reduce", *p.level.reduce);
  write_json(dir / "params.json", {{"channels", p.align.in},
                                   {"hidden", sal.hidden},
                                   {"experts", moe.num_experts()},
                                   {"gate_kernel", moe.gate_kernel},
                                   {"reduce", p.level.reduce.has_value()},
                                   {"tensors", std::move(roles)}});
}

FuseParams default_fuse_params(int channels, int experts) {
  FuseParams p;
  p.align = PointwiseAffine::identity(channels);
  p.level.saliency = SaliencyParams::zeros(2 * channels);
  p.level.moe = MoeParams::zeros(2 * channels, experts);
  PointwiseAffine reduce = PointwiseAffine::zeros(2 * channels, channels);
  for (int c = 0; c < channels; ++c) {
    reduce.weights[static_cast<std::size_t>(c) * 2 * channels + channels + c] = 1.0;
  }
  p.level.reduce = reduce;
  return p;
}

}  // namespace panocc
