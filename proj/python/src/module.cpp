// Python bindings for the panocc core. Arrays cross the boundary as float64
// (uint8 for labels and masks) in C order: images (H, W, C), volumes
// (nz, ny, nx, C), label grids (nz, ny, nx).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panocc/amoe3d.hpp"
#include "panocc/bigrid.hpp"
#include "panocc/camera.hpp"
#include "panocc/error.hpp"
#include "panocc/lifting.hpp"
#include "panocc/ssc.hpp"
#include "panocc/synth.hpp"
#include "panocc/tensor_io.hpp"
#include "panocc/unwrap.hpp"

namespace py = pybind11;
using namespace panocc;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <typename T, typename A>
std::vector<T> to_vector(const A& a) {
  return std::vector<T>(a.data(), a.data() + a.size());
}

ImagePlane image_of(const F64& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw Error(ErrorCode::DimMismatch, "image must be (H, W) or (H, W, C)");
  ImagePlane img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                 a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1);
  img.data = to_vector<double>(a);
  return img;
}

py::array_t<double> array_of(const ImagePlane& img) {
  return to_array(img.data, {img.height, img.width, img.channels});
}

GridDims dims_of(const py::array& a, int rank) {
  if (a.ndim() != rank) throw Error(ErrorCode::DimMismatch, "expected a rank-" + std::to_string(rank) + " array");
  return {static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(1)),
          static_cast<std::size_t>(a.shape(0))};
}

std::vector<py::ssize_t> shape_of(const GridDims& d) {
  return {static_cast<py::ssize_t>(d.nz), static_cast<py::ssize_t>(d.ny), static_cast<py::ssize_t>(d.nx)};
}

FeatureVolume volume_of(const F64& a, const GridSpec& grid, const std::optional<U8>& valid) {
  const GridDims d = dims_of(a, 4);
  if (!(d == grid_dims(grid))) throw Error(ErrorCode::DimMismatch, "volume does not match the grid");
  FeatureVolume v(grid, static_cast<int>(a.shape(3)));
  v.data = to_vector<double>(a);
  if (valid) {
    if (static_cast<std::size_t>(valid->size()) != v.voxel_count()) {
      throw Error(ErrorCode::DimMismatch, "mask does not match the volume");
    }
    v.valid = to_vector<std::uint8_t>(*valid);
  }
  return v;
}

py::tuple volume_result(const FeatureVolume& v) {
  auto shape = shape_of(v.dims());
  auto mask = to_array(v.valid, shape);
  shape.push_back(v.channels);
  return py::make_tuple(to_array(v.data, shape), mask);
}

LogitVolume logits_of(const F64& z) {
  LogitVolume out;
  out.dims = dims_of(z, 4);
  out.classes = static_cast<int>(z.shape(3));
  out.data = to_vector<double>(z);
  return out;
}

OccupancyGrid labels_of(const U8& a) {
  OccupancyGrid g(dims_of(a, 3));
  g.labels = to_vector<std::uint8_t>(a);
  return g;
}

View view_of(const std::string& s) { return view_from_string(s); }

std::vector<Vec3> points_of(const F64& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw Error(ErrorCode::DimMismatch, "points must be (N, 3)");
  std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {a.data()[3 * i], a.data()[3 * i + 1], a.data()[3 * i + 2]};
  return out;
}

py::array_t<double> points_array(const std::vector<Vec3>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  double* p = out.mutable_data();
  for (const auto& v : pts) {
    *p++ = v.x;
    *p++ = v.y;
    *p++ = v.z;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_panocc, m) {
  m.doc() = "Panoramic semantic occupancy: camera, unwrap, bi-grid, lifting, fusion and SSC scoring.";

  static py::exception<Error> error(m, "PanoccError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object code = py::str(to_string(e.code()));
      PyErr_SetObject(error.ptr(), py::make_tuple(py::str(e.what()), code).ptr());
    }
  });

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init([](std::vector<double> coeffs, double u0, double v0, double theta_min, double theta_max,
                       int width, int height, std::array<double, 4> affine, bool v_flip) {
             CameraModel::Params p;
             p.coeffs = std::move(coeffs);
             p.u0 = u0;
             p.v0 = v0;
             p.theta_min = theta_min;
             p.theta_max = theta_max;
             p.width = width;
             p.height = height;
             p.affine = affine;
             p.v_flip = v_flip;
             return CameraModel(p);
           }),
           py::arg("coeffs"), py::arg("u0"), py::arg("v0"), py::arg("theta_min"), py::arg("theta_max"),
           py::arg("width"), py::arg("height"), py::arg("affine") = std::array<double, 4>{1, 0, 0, 1},
           py::arg("v_flip") = false)
      .def("radial_distance", &CameraModel::radial_distance, py::arg("polar"))
      .def("invert_radial", &CameraModel::invert_radial, py::arg("r"))
      .def_property_readonly("theta_min", &CameraModel::theta_min)
      .def_property_readonly("theta_max", &CameraModel::theta_max)
      .def_property_readonly("raw_width", &CameraModel::raw_width)
      .def_property_readonly("raw_height", &CameraModel::raw_height)
      .def_property_readonly("coeffs", [](const CameraModel& c) { return c.params().coeffs; });

  m.def("fixture_camera", &fixture_camera);

  m.def(
      "build_remap",
      [](int width, int height, const CameraModel& model) {
        const RemapTable t = build_remap(width, height, model);
        return py::make_tuple(to_array(t.src_u, {height, width}), to_array(t.src_v, {height, width}),
                              to_array(t.valid, {height, width}));
      },
      py::arg("width"), py::arg("height"), py::arg("model"),
      "Source raw pixel (u, v) and validity for every equirectangular pixel.");

  m.def(
      "unwrap",
      [](const F64& raw, const CameraModel& model, int width, int height, double fill) {
        const RemapTable t = build_remap(width, height, model);
        ImagePlane out;
        {
          py::gil_scoped_release release;
          out = apply_remap(image_of(raw), t, fill);
        }
        return py::make_tuple(array_of(out), to_array(t.valid, {height, width}));
      },
      py::arg("raw"), py::arg("model"), py::arg("width"), py::arg("height"), py::arg("fill") = 0.0,
      "Raw annular image (H, W[, C]) -> (equirectangular image, validity mask).");

  m.def(
      "cartesian_centroids",
      [](std::array<std::size_t, 3> n, std::array<double, 3> origin, std::array<double, 3> edge) {
        return points_array(cartesian_centroids({n[0], n[1], n[2], origin[0], origin[1], origin[2], edge[0], edge[1], edge[2]}));
      },
      py::arg("counts"), py::arg("origin"), py::arg("edge"));

  m.def(
      "cross_indices",
      [](std::array<std::size_t, 3> n, std::array<double, 3> origin, std::array<double, 3> edge,
         std::optional<std::size_t> nphi, int level) {
        const CartesianGridSpec ca{n[0], n[1], n[2], origin[0], origin[1], origin[2], edge[0], edge[1], edge[2]};
        PolarGridSpec po = PolarGridSpec::default_for(ca);
        if (nphi) po.nphi = *nphi;
        const CrossIndexTable t = build_cross_indices(ca, po, level);
        const GridDims d = ca.at_level(level).dims();
        return to_array(t.indices, shape_of(d));
      },
      py::arg("counts"), py::arg("origin"), py::arg("edge"), py::arg("nphi") = py::none(), py::arg("level") = 1,
      "Flat index of the default polar cell containing every Cartesian centroid.");

  m.def(
      "lift",
      [](const F64& plane, const F64& points, const CameraModel& model, const std::string& view, int scale,
         std::optional<std::pair<double, double>> delta) {
        const FeaturePlane fp(image_of(plane), scale, view_of(view));
        const auto pts = points_of(points);
        const CartesianGridSpec grid{pts.size(), 1, 1, 0, 0, 0, 1, 1, 1};
        std::optional<PixelOffset> d;
        if (delta) d = PixelOffset{delta->first, delta->second};
        FeatureVolume v;
        {
          py::gil_scoped_release release;
          v = lift_volume(grid, pts, fp.view, model, fp, d);
        }
        return py::make_tuple(to_array(v.data, {static_cast<py::ssize_t>(pts.size()), v.channels}),
                              to_array(v.valid, {static_cast<py::ssize_t>(pts.size())}));
      },
      py::arg("plane"), py::arg("points"), py::arg("model"), py::arg("view") = "equi", py::arg("scale") = 1,
      py::arg("delta") = py::none(), "Bilinear samples (N, C) and validity (N) at camera-frame points (N, 3).");

  m.def(
      "grad_energy3d",
      [](const F64& y) {
        const GridDims d = dims_of(y, 4);
        const FeatureVolume v = volume_of(y, CartesianGridSpec{d.nx, d.ny, d.nz, 0, 0, 0, 1, 1, 1}, std::nullopt);
        return to_array(grad_energy3d(v), shape_of(d));
      },
      py::arg("volume"), "Per-voxel sum of squared forward differences of a (nz, ny, nx, C) volume.");

  m.def(
      "moe_uniform_fuse",
      [](const F64& y, int experts) {
        const GridDims d = dims_of(y, 4);
        const FeatureVolume v = volume_of(y, CartesianGridSpec{d.nx, d.ny, d.nz, 0, 0, 0, 1, 1, 1}, std::nullopt);
        const MoeParams p = MoeParams::zeros(v.channels, experts);
        return py::make_tuple(to_array(moe_gates(v, p), {static_cast<py::ssize_t>(d.count()), experts}),
                              volume_result(moe_fuse(v, p))[0]);
      },
      py::arg("volume"), py::arg("experts") = 4, "Gates and output of a zero-initialized expert block.");

  m.def(
      "losses",
      [](const F64& logits, const U8& labels, std::vector<double> class_weights, std::size_t sectors) {
        const LossBreakdown b = total_loss(logits_of(logits), labels_of(labels), {std::move(class_weights), sectors});
        py::dict out;
        out["ce"] = b.ce;
        out["scal_sem"] = b.scal_sem;
        out["scal_geo"] = b.scal_geo;
        out["fp"] = b.fp;
        out["total"] = b.total;
        return out;
      },
      py::arg("logits"), py::arg("labels"), py::arg("class_weights") = std::vector<double>{},
      py::arg("sectors") = 8, "CE, semantic and geometric SCAL, frustum proportion and their sum.");

  m.def(
      "argmax",
      [](const F64& logits) {
        const OccupancyGrid g = argmax_labels(logits_of(logits));
        return to_array(g.labels, shape_of(g.dims));
      },
      py::arg("logits"));

  m.def(
      "metrics",
      [](const U8& pred, const U8& gt, int classes) {
        const SscReport r = ssc_metrics(labels_of(pred), labels_of(gt), classes);
        py::dict out;
        out["miou"] = r.miou;
        out["iou"] = r.geom_iou;
        out["precision"] = r.precision;
        out["recall"] = r.recall;
        out["per_class_iou"] = r.per_class_iou;
        out["class_present"] = std::vector<bool>(r.class_present.begin(), r.class_present.end());
        out["tp"] = r.tp;
        out["fp"] = r.fp;
        out["fn"] = r.fn;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("classes"), "SSC scores; IGNORE (255) voxels are skipped.");

  m.def(
      "fixture",
      [](std::uint64_t seed, const std::string& preset, int width, int height) {
        const SynthScene s = make_fixture(seed, preset);
        ImagePlane plane;
        {
          py::gil_scoped_release release;
          plane = render_equi(s, width, height);
        }
        py::dict out;
        out["labels"] = to_array(s.occupancy.labels, shape_of(s.grid.dims()));
        out["palette"] = to_array(s.palette, {s.num_classes, s.feature_dim});
        out["centroids"] = points_array(cartesian_centroids(s.grid));
        out["panorama"] = array_of(plane);
        return out;
      },
      py::arg("seed"), py::arg("preset"), py::arg("width") = 256, py::arg("height") = 128,
      "Synthetic voxel scene with its rendered equirectangular feature plane.");

  m.def(
      "read_ptns",
      [](const std::string& path) {
        const Tensor t = read_ptns(path);
        std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
        return to_array(t.values, shape);
      },
      py::arg("path"));

  m.def(
      "write_ptns",
      [](const std::string& path, const py::array& a, const std::string& dtype) {
        const F64 values = F64::ensure(a);
        Tensor t;
        for (py::ssize_t i = 0; i < values.ndim(); ++i) t.dims.push_back(static_cast<std::uint32_t>(values.shape(i)));
        if (dtype == "f32") t.dtype = DType::F32;
        else if (dtype == "u8") t.dtype = DType::U8;
        else if (dtype == "u16") t.dtype = DType::U16;
        else if (dtype == "u32") t.dtype = DType::U32;
        else throw Error(ErrorCode::InvalidArgument, "dtype must be f32, u8, u16 or u32");
        t.values = to_vector<double>(values);
        write_ptns(path, t);
      },
      py::arg("path"), py::arg("array"), py::arg("dtype") = "f32");

  m.attr("IGNORE") = static_cast<int>(kIgnoreLabel);
}
