#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "panocc/amoe3d.hpp"
#include "panocc/bigrid.hpp"
#include "panocc/camera.hpp"
#include "panocc/lifting.hpp"
#include "panocc/types.hpp"

namespace panocc {

/// Calibration file: a JSON object with keys a (coefficients), u0, v0,
/// A (row-major 2x2), theta_min, theta_max, w_raw, h_raw and optional v_flip.
/// Angles are zenith angles in radians.
CameraModel::Params load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CameraModel::Params& params);

struct ClassEntry {
  int id = 0;
  std::string name;
  double frequency = 0.0;  // voxel frequency used for CE weights

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

struct PlaneRef {
  std::string path;
  int scale = 1;
  View view = View::Equi;
  std::string mask;  // optional

  friend bool operator==(const PlaneRef&, const PlaneRef&) = default;
};

/// One sample. Every path is optional and relative to the manifest directory.
struct FrameEntry {
  std::string id;
  std::string panorama;
  std::vector<PlaneRef> features;
  std::string gt;
  std::string mask;
  std::string prediction;
  std::string logits;

  friend bool operator==(const FrameEntry&, const FrameEntry&) = default;
};

struct Manifest {
  std::string dataset;
  std::string split;
  CartesianGridSpec cartesian;
  PolarGridSpec polar;
  std::string calibration;
  /// Grid frame -> camera frame.
  RigidTransform pose;
  std::vector<ClassEntry> classes;
  std::vector<FrameEntry> frames;
  /// Directory the relative paths resolve against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  std::vector<double> class_frequencies() const;

  /// Checks grid specs, dense class ids and that every referenced path exists.
  /// Throws Format or Io.
  void validate() const;

  friend bool operator==(const Manifest& a, const Manifest& b);
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// GDC head as a PTNS pair: weights (C, 2) and bias (2).
GdcHead load_gdc_head(const std::filesystem::path& weights, const std::filesystem::path& bias);
void save_gdc_head(const std::filesystem::path& weights, const std::filesystem::path& bias,
                   const GdcHead& head);

/// Everything `panocc fuse` needs for one level.
struct FuseParams {
  PointwiseAffine align;
  AmoeLevelParams level;
};

/// Parameter directory: params.json holds the sizes and maps every tensor
/// role to a PTNS file in the same directory.
FuseParams load_fuse_params(const std::filesystem::path& dir);
void save_fuse_params(const std::filesystem::path& dir, const FuseParams& params);

/// Zero-initialized parameters for `channels` polar and Cartesian channels:
/// identity alignment, zero saliency and experts, and a reduce back to
/// `channels` that keeps the Cartesian half.
FuseParams default_fuse_params(int channels, int experts = 4);

}  // namespace panocc
