#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panocc/bigrid.hpp"
#include "panocc/image.hpp"
#include "panocc/lifting.hpp"
#include "panocc/ssc.hpp"
#include "panocc/volume.hpp"

namespace panocc {

/// Element type codes of the PTNS container.
enum class DType : std::uint8_t { F32 = 0, U8 = 1, U16 = 2, U32 = 3 };

std::size_t dtype_size(DType dtype);

/// Dense row-major tensor. Values are held as double, which represents every
/// f32/u8/u16/u32 element exactly; encoding narrows to `dtype`.
struct Tensor {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::F32;
  std::vector<double> values;

  std::size_t element_count() const;
};

/// PTNS layout, little-endian: "PTNS1", u32 rank, u32 dims[rank], u8 dtype,
/// payload. Integer dtypes reject values that are negative, non-integral or
/// out of range; f32 rounds to nearest.
std::vector<std::uint8_t> encode_ptns(const Tensor& t);
Tensor decode_ptns(std::span<const std::uint8_t> bytes);

void write_ptns(const std::filesystem::path& path, const Tensor& t);
Tensor read_ptns(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Conversions between tensors and domain types. Images are rank 2 (H, W) or
// rank 3 (H, W, C); volumes rank 4 (nz, ny, nx, C); grids and masks rank 3
// (nz, ny, nx); cross tables rank 1 u32.
ImagePlane image_from_tensor(const Tensor& t);
Tensor tensor_from_image(const ImagePlane& img, DType dtype = DType::F32);
Tensor mask_tensor(int width, int height, std::span<const std::uint8_t> valid);

Tensor tensor_from_volume(const FeatureVolume& v);
FeatureVolume volume_from_tensor(const Tensor& t, const GridSpec& grid);
Tensor tensor_from_voxel_mask(const GridDims& dims, std::span<const std::uint8_t> valid);
std::vector<std::uint8_t> voxel_mask_from_tensor(const Tensor& t, const GridDims& dims);

Tensor tensor_from_grid(const OccupancyGrid& g);
OccupancyGrid grid_from_tensor(const Tensor& t);

LogitVolume logits_from_tensor(const Tensor& t);

Tensor tensor_from_cross_table(const CrossIndexTable& table);
CrossIndexTable cross_table_from_tensor(const Tensor& t, int level, std::size_t polar_count);

Tensor tensor_from_points(std::span<const Vec3> points);

}  // namespace panocc
