#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panocc/types.hpp"

namespace panocc {

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Per-voxel class logits, voxel-major (classes contiguous). Class 0 is empty
/// space. `valid` marks voxels visible to lifting; empty means all valid.
struct LogitVolume {
  GridDims dims;
  int classes = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;

  std::size_t voxel_count() const { return dims.count(); }
  bool is_valid(std::size_t v) const { return valid.empty() || valid[v] != 0; }
  std::span<const double> at(std::size_t v) const {
    return {data.data() + v * static_cast<std::size_t>(classes), static_cast<std::size_t>(classes)};
  }
  void validate() const;
};

/// Semantic labels in {0 .. C-1} or kIgnoreLabel.
struct OccupancyGrid {
  GridDims dims;
  std::vector<std::uint8_t> labels;

  OccupancyGrid() = default;
  explicit OccupancyGrid(GridDims d, std::uint8_t fill = 0) : dims(d), labels(d.count(), fill) {}
  std::size_t voxel_count() const { return dims.count(); }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

/// Per-voxel argmax; ties go to the lowest class, invalid voxels to IGNORE.
OccupancyGrid argmax_labels(const LogitVolume& z);

/// w_c = 1 / ln(1.02 + f_c).
std::vector<double> inverse_log_class_weights(std::span<const double> frequencies);

/// Weighted mean of -log softmax(z)[gt] over voxels that are valid and not
/// IGNORE: sum w_gt * nll / sum w_gt. Empty weights mean unit weights.
/// Throws NoSupervisedVoxels when no voxel qualifies.
double ce_loss(const LogitVolume& z, const OccupancyGrid& gt,
               std::span<const double> class_weights = {});

enum class ScalMode { Semantic, Geometric };

/// Scene-class affinity loss. For every class c present in the supervised
/// voxels (all C classes in Semantic mode; empty vs occupied in Geometric
/// mode) it accumulates -(log P_c + log R_c + log S_c) from soft precision,
/// recall and specificity, dropping a ratio whose denominator is zero, and
/// returns the mean over present classes.
double scal_loss(const LogitVolume& z, const OccupancyGrid& gt, ScalMode mode);

/// Azimuthal sector (0 .. sectors-1) of voxel column (i, j) about the grid's
/// xy center.
std::size_t frustum_sector(const GridDims& dims, std::size_t i, std::size_t j, std::size_t sectors);

/// Mean over non-empty azimuthal frustums of KL(q || p) between ground-truth
/// class proportions q and mean predicted probabilities p; classes with
/// q_c = 0 are skipped.
double fp_loss(const LogitVolume& z, const OccupancyGrid& gt, std::size_t sectors = 8);

struct LossConfig {
  std::vector<double> class_weights;  // empty = unit weights
  std::size_t fp_sectors = 8;
};

struct LossBreakdown {
  double ce = 0.0;
  double scal_sem = 0.0;
  double scal_geo = 0.0;
  double fp = 0.0;
  double total = 0.0;
};

/// Unit-weight sum ce + scal_sem + scal_geo + fp.
LossBreakdown total_loss(const LogitVolume& z, const OccupancyGrid& gt, const LossConfig& config);

struct SscReport {
  int num_classes = 0;
  std::vector<double> per_class_iou;        // classes 1 .. C-1
  std::vector<std::uint8_t> class_present;  // classes 1 .. C-1 with ground-truth voxels
  double miou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double geom_iou = 0.0;
  std::uint64_t geom_tp = 0, geom_fp = 0, geom_fn = 0;
  std::vector<std::uint64_t> tp, fp, fn;  // per class 0 .. C-1
};

/// Confusion counts accumulated over any number of frames. Voxels where
/// either grid is IGNORE are skipped.
class SscMetrics {
 public:
  explicit SscMetrics(int num_classes);

  /// Throws DimMismatch on shape mismatch, OutOfRange on a label >= C.
  void add(const OccupancyGrid& pred, const OccupancyGrid& gt);
  SscReport report() const;

 private:
  int num_classes_;
  std::uint64_t geom_tp_ = 0, geom_fp_ = 0, geom_fn_ = 0;
  std::vector<std::uint64_t> tp_, fp_, fn_;
};

SscReport ssc_metrics(const OccupancyGrid& pred, const OccupancyGrid& gt, int num_classes);

}  // namespace panocc
