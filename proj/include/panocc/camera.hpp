#pragma once

#include <array>
#include <string>
#include <vector>

#include "panocc/types.hpp"

namespace panocc {

/// Ray direction in equirectangular terms.
///
/// `phi` is the azimuth in [-pi, pi). `theta` is the elevation above the
/// horizontal plane, so the top image row has theta = pi/2.
struct SphericalAngles {
  double phi = 0.0;
  double theta = 0.0;
};

/// Wraps an azimuth into [-pi, pi).
double wrap_azimuth(double phi);

/// Angle between the ray and the +z axis. The radial polynomial of
/// CameraModel and its valid range [theta_min, theta_max] are expressed in
/// this zenith angle, which lives in [0, pi]: polar = pi/2 - elevation.
inline double polar_angle(const SphericalAngles& a) { return 1.5707963267948966 - a.theta; }

enum class View { Equi, Raw };

const char* to_string(View view);
View view_from_string(const std::string& name);

/// Calibrated omnidirectional (panoramic annular) camera.
///
/// Raw pixel of a ray: (u0, v0) + A * r(polar) * (cos phi, sin phi), with
/// r(polar) = sum_i a_i polar^i in pixels. Immutable once constructed; every
/// member is safe to call concurrently.
class CameraModel {
 public:
  struct Params {
    std::vector<double> coeffs;             // a_0 .. a_N
    double u0 = 0.0;
    double v0 = 0.0;
    std::array<double, 4> affine{1, 0, 0, 1};  // row-major 2x2
    double theta_min = 0.0;
    double theta_max = 0.0;
    int width = 0;   // raw image width (pixels)
    int height = 0;  // raw image height (pixels)
    bool v_flip = false;  // mirror raw rows: v -> (height - 1) - v
  };

  static constexpr int kMonotoneSamples = 4096;

  /// Validates the parameters: non-empty coefficients, 0 <= theta_min <
  /// theta_max <= pi, |det A| > 1e-12, raw dims >= 2, and a strictly monotone
  /// radial polynomial over kMonotoneSamples uniform samples of the range.
  /// Throws Error(InvalidArgument) otherwise.
  explicit CameraModel(Params params);

  const Params& params() const { return params_; }
  double theta_min() const { return params_.theta_min; }
  double theta_max() const { return params_.theta_max; }
  int raw_width() const { return params_.width; }
  int raw_height() const { return params_.height; }
  bool in_range(double polar) const {
    return polar >= params_.theta_min && polar <= params_.theta_max;
  }

  /// r(polar) by Horner's rule. Throws OutOfRange outside the valid range.
  double radial_distance(double polar) const;

  /// dr/dpolar, unchecked.
  double radial_derivative(double polar) const;

  /// Raw annulus pixel of a ray. Throws OutOfRange when the zenith angle of
  /// `angles` is outside the valid range.
  Pixel forward_project_raw(const SphericalAngles& angles) const;

  /// Zenith angle whose radius is `r_target`, by safeguarded Newton iteration
  /// on the monotone bracket. The residual satisfies
  /// |r(theta) - r_target| <= 1e-9 * max(1, r_target).
  double invert_radial(double r_target) const;

  /// forward_project_raw without the range check.
  Pixel raw_pixel_unchecked(const SphericalAngles& angles) const;

 private:
  double horner(double polar) const;

  Params params_;
  double r_at_min_ = 0.0;
  double r_at_max_ = 0.0;
};

/// Linear equirectangular mapping: phi = 2 pi u / W - pi, theta = pi/2 - pi v / H.
SphericalAngles equi_to_angles(double u, double v, int width, int height);

/// Angles of a camera-frame point: phi = atan2(y, x), theta = atan2(z, hypot).
SphericalAngles angles_of(const Vec3& p);

struct Projection {
  Pixel pixel;
  bool valid = false;
};

/// Projects a camera-frame point (meters) into a view of size width x height.
///
/// Raw view: the raw-annulus pixel, rescaled by width / raw_width and
/// height / raw_height so the same model serves downscaled feature planes.
/// Equi view: the inverse of equi_to_angles at the given size. The result is
/// invalid when the zenith angle leaves the model range or the pixel falls
/// outside [0, W-1] x [0, H-1] (equi columns wrap, so only rows are checked).
/// Throws DegeneratePoint for |p| < 1e-9 m.
Projection project_point(const Vec3& p, View view, const CameraModel& model, int width,
                         int height);

}  // namespace panocc
