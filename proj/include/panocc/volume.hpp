#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "panocc/bigrid.hpp"

namespace panocc {

using GridSpec = std::variant<CartesianGridSpec, PolarGridSpec>;

inline GridDims grid_dims(const GridSpec& grid) {
  return std::visit([](const auto& g) { return g.dims(); }, grid);
}

inline bool is_polar(const GridSpec& grid) { return std::holds_alternative<PolarGridSpec>(grid); }

/// Multi-channel voxel features. Voxel v's channels are contiguous at
/// data[v * channels ...]; voxel order follows GridDims::flat. Invalid voxels
/// hold zeros.
struct FeatureVolume {
  GridSpec grid;
  int channels = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;

  FeatureVolume() = default;
  FeatureVolume(GridSpec g, int c)
      : grid(std::move(g)), channels(c),
        data(grid_dims(grid).count() * static_cast<std::size_t>(c), 0.0),
        valid(grid_dims(grid).count(), 1) {}

  GridDims dims() const { return grid_dims(grid); }
  std::size_t voxel_count() const { return valid.size(); }

  std::span<double> at(std::size_t voxel) {
    return {data.data() + voxel * static_cast<std::size_t>(channels),
            static_cast<std::size_t>(channels)};
  }
  std::span<const double> at(std::size_t voxel) const {
    return {data.data() + voxel * static_cast<std::size_t>(channels),
            static_cast<std::size_t>(channels)};
  }
};

}  // namespace panocc
