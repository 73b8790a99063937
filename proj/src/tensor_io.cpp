#include "panocc/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "panocc/error.hpp"

namespace panocc {
namespace {

constexpr char kMagic[5] = {'P', 'T', 'N', 'S', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[at + b]) << (8 * b);
  return v;
}

double integral_value(double v, double max_value) {
  if (!(v >= 0.0 && v <= max_value && std::floor(v) == v)) {
    throw Error(ErrorCode::Format, "value " + std::to_string(v) + " does not fit the integer dtype");
  }
  return v;
}

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.dims.size() != rank) {
    throw Error(ErrorCode::Format, std::string(what) + " must be a rank-" + std::to_string(rank) +
                                       " tensor, got rank " + std::to_string(t.dims.size()));
  }
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::F32: return 4;
    case DType::U8: return 1;
    case DType::U16: return 2;
    case DType::U32: return 4;
  }
  throw Error(ErrorCode::Format, "unknown dtype");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_ptns(const Tensor& t) {
  if (t.values.size() != t.element_count()) {
    throw Error(ErrorCode::Format, "tensor values do not match its dims");
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  out.push_back(static_cast<std::uint8_t>(t.dtype));
  out.reserve(out.size() + t.values.size() * dtype_size(t.dtype));
  for (double v : t.values) {
    switch (t.dtype) {
      case DType::F32: put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); break;
      case DType::U8: out.push_back(static_cast<std::uint8_t>(integral_value(v, 255.0))); break;
      case DType::U16: {
        const auto x = static_cast<std::uint16_t>(integral_value(v, 65535.0));
        out.push_back(static_cast<std::uint8_t>(x));
        out.push_back(static_cast<std::uint8_t>(x >> 8));
        break;
      }
      case DType::U32: put_u32(out, static_cast<std::uint32_t>(integral_value(v, 4294967295.0))); break;
    }
  }
  return out;
}

Tensor decode_ptns(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw Error(ErrorCode::Format, "missing PTNS1 magic");
  }
  Tensor t;
  const std::uint32_t rank = get_u32(bytes, 5);
  std::size_t at = 9;
  if (rank > 16 || bytes.size() < at + 4 * rank + 1) throw Error(ErrorCode::Format, "truncated header");
  for (std::uint32_t r = 0; r < rank; ++r, at += 4) t.dims.push_back(get_u32(bytes, at));
  const std::uint8_t code = bytes[at++];
  if (code > 3) throw Error(ErrorCode::Format, "unknown dtype code " + std::to_string(code));
  t.dtype = static_cast<DType>(code);
  const std::size_t n = t.element_count();
  const std::size_t width = dtype_size(t.dtype);
  if (bytes.size() - at != n * width) {
    throw Error(ErrorCode::Format, "payload has " + std::to_string(bytes.size() - at) +
                                       " bytes, expected " + std::to_string(n * width));
  }
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i, at += width) {
    switch (t.dtype) {
      case DType::F32: t.values[i] = std::bit_cast<float>(get_u32(bytes, at)); break;
      case DType::U8: t.values[i] = bytes[at]; break;
      case DType::U16: t.values[i] = bytes[at] | (bytes[at + 1] << 8); break;
      case DType::U32: t.values[i] = get_u32(bytes, at); break;
    }
  }
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_ptns(const std::filesystem::path& path, const Tensor& t) {
  write_file_bytes(path, encode_ptns(t));
}

Tensor read_ptns(const std::filesystem::path& path) {
  try {
    return decode_ptns(read_file_bytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Format) throw Error(ErrorCode::Format, path.string() + ": " + e.what());
    throw;
  }
}

ImagePlane image_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2 && t.dims.size() != 3) {
    throw Error(ErrorCode::Format, "image must be rank 2 (H, W) or rank 3 (H, W, C)");
  }
  ImagePlane img;
  img.height = static_cast<int>(t.dims[0]);
  img.width = static_cast<int>(t.dims[1]);
  img.channels = t.dims.size() == 3 ? static_cast<int>(t.dims[2]) : 1;
  img.data = t.values;
  return img;
}

Tensor tensor_from_image(const ImagePlane& img, DType dtype) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(img.height), static_cast<std::uint32_t>(img.width),
            static_cast<std::uint32_t>(img.channels)};
  t.dtype = dtype;
  t.values = img.data;
  return t;
}

Tensor mask_tensor(int width, int height, std::span<const std::uint8_t> valid) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(height), static_cast<std::uint32_t>(width)};
  t.dtype = DType::U8;
  t.values.assign(valid.begin(), valid.end());
  if (t.values.empty()) t.values.assign(static_cast<std::size_t>(width) * height, 1.0);
  return t;
}

Tensor tensor_from_volume(const FeatureVolume& v) {
  const GridDims d = v.dims();
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(d.nz), static_cast<std::uint32_t>(d.ny),
            static_cast<std::uint32_t>(d.nx), static_cast<std::uint32_t>(v.channels)};
  t.values = v.data;
  return t;
}

FeatureVolume volume_from_tensor(const Tensor& t, const GridSpec& grid) {
  expect_rank(t, 4, "feature volume");
  const GridDims d = grid_dims(grid);
  if (t.dims[0] != d.nz || t.dims[1] != d.ny || t.dims[2] != d.nx) {
    throw Error(ErrorCode::DimMismatch, "volume tensor does not match the grid");
  }
  FeatureVolume v(grid, static_cast<int>(t.dims[3]));
  v.data = t.values;
  return v;
}

Tensor tensor_from_voxel_mask(const GridDims& dims, std::span<const std::uint8_t> valid) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(dims.nz), static_cast<std::uint32_t>(dims.ny),
            static_cast<std::uint32_t>(dims.nx)};
  t.dtype = DType::U8;
  t.values.assign(valid.begin(), valid.end());
  return t;
}

std::vector<std::uint8_t> voxel_mask_from_tensor(const Tensor& t, const GridDims& dims) {
  expect_rank(t, 3, "voxel mask");
  if (t.dims[0] != dims.nz || t.dims[1] != dims.ny || t.dims[2] != dims.nx) {
    throw Error(ErrorCode::DimMismatch, "voxel mask does not match the grid");
  }
  std::vector<std::uint8_t> out(t.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.values[i] != 0.0 ? 1 : 0;
  return out;
}

Tensor tensor_from_grid(const OccupancyGrid& g) {
  Tensor t = tensor_from_voxel_mask(g.dims, g.labels);
  return t;
}

OccupancyGrid grid_from_tensor(const Tensor& t) {
  expect_rank(t, 3, "occupancy grid");
  if (t.dtype != DType::U8 && t.dtype != DType::U16) {
    throw Error(ErrorCode::Format, "occupancy grid must be u8 or u16");
  }
  OccupancyGrid g(GridDims{t.dims[2], t.dims[1], t.dims[0]});
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (t.values[i] > 255.0) {
      throw Error(ErrorCode::Format, "label " + std::to_string(t.values[i]) + " exceeds 255");
    }
    g.labels[i] = static_cast<std::uint8_t>(t.values[i]);
  }
  return g;
}

LogitVolume logits_from_tensor(const Tensor& t) {
  expect_rank(t, 4, "logit volume");
  LogitVolume z;
  z.dims = {t.dims[2], t.dims[1], t.dims[0]};
  z.classes = static_cast<int>(t.dims[3]);
  z.data = t.values;
  return z;
}

Tensor tensor_from_cross_table(const CrossIndexTable& table) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(table.indices.size())};
  t.dtype = DType::U32;
  t.values.assign(table.indices.begin(), table.indices.end());
  return t;
}

CrossIndexTable cross_table_from_tensor(const Tensor& t, int level, std::size_t polar_count) {
  expect_rank(t, 1, "cross index table");
  CrossIndexTable table;
  table.level = level;
  table.polar_count = polar_count;
  table.indices.resize(t.values.size());
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    table.indices[i] = static_cast<std::uint32_t>(t.values[i]);
  }
  return table;
}

Tensor tensor_from_points(std::span<const Vec3> points) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(points.size()), 3};
  t.values.reserve(points.size() * 3);
  for (const auto& p : points) {
    t.values.push_back(p.x);
    t.values.push_back(p.y);
    t.values.push_back(p.z);
  }
  return t;
}

}  // namespace panocc
