#include "panocc/camera.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "panocc/error.hpp"

namespace panocc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxNewtonIterations = 100;

}  // namespace

double wrap_azimuth(double phi) {
  if (phi >= -kPi && phi < kPi) return phi;
  double wrapped = std::fmod(phi + kPi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  wrapped -= kPi;
  return wrapped >= kPi ? -kPi : wrapped;
}

const char* to_string(View view) { return view == View::Equi ? "equi" : "raw"; }

View view_from_string(const std::string& name) {
  if (name == "equi") return View::Equi;
  if (name == "raw") return View::Raw;
  throw Error(ErrorCode::InvalidArgument, "unknown view '" + name + "'");
}

CameraModel::CameraModel(Params params) : params_(std::move(params)) {
  const auto& p = params_;
  if (p.coeffs.empty()) throw Error(ErrorCode::InvalidArgument, "empty radial polynomial");
  for (double a : p.coeffs) {
    if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
  }
  if (!(p.theta_min >= 0.0 && p.theta_min < p.theta_max && p.theta_max <= kPi)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= theta_min < theta_max <= pi");
  }
  const double det = p.affine[0] * p.affine[3] - p.affine[1] * p.affine[2];
  if (!(std::abs(det) > 1e-12)) throw Error(ErrorCode::InvalidArgument, "affine matrix is singular");
  if (p.width < 2 || p.height < 2) {
    throw Error(ErrorCode::InvalidArgument, "raw image must be at least 2x2");
  }

  const double step = (p.theta_max - p.theta_min) / (kMonotoneSamples - 1);
  double prev = horner(p.theta_min);
  int sign = 0;
  for (int i = 1; i < kMonotoneSamples; ++i) {
    const double t = i + 1 == kMonotoneSamples ? p.theta_max : p.theta_min + i * step;
    const double r = horner(t);
    const int s = r > prev ? 1 : (r < prev ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw Error(ErrorCode::InvalidArgument,
                  "radial polynomial is not strictly monotone on [theta_min, theta_max]");
    }
    sign = s;
    prev = r;
  }
  r_at_min_ = horner(p.theta_min);
  r_at_max_ = horner(p.theta_max);
}

double CameraModel::horner(double polar) const {
  const auto& a = params_.coeffs;
  double r = a.back();
  for (std::size_t i = a.size() - 1; i-- > 0;) r = r * polar + a[i];
  return r;
}

double CameraModel::radial_derivative(double polar) const {
  const auto& a = params_.coeffs;
  if (a.size() < 2) return 0.0;
  double d = static_cast<double>(a.size() - 1) * a.back();
  for (std::size_t i = a.size() - 1; i-- > 1;) d = d * polar + static_cast<double>(i) * a[i];
  return d;
}

double CameraModel::radial_distance(double polar) const {
  if (!in_range(polar)) {
    throw Error(ErrorCode::OutOfRange, "polar angle " + std::to_string(polar) +
                                           " outside [theta_min, theta_max]");
  }
  return horner(polar);
}

Pixel CameraModel::raw_pixel_unchecked(const SphericalAngles& angles) const {
  const double r = horner(polar_angle(angles));
  const double x = r * std::cos(angles.phi);
  const double y = r * std::sin(angles.phi);
  const auto& A = params_.affine;
  Pixel px{params_.u0 + (A[0] * x + A[1] * y), params_.v0 + (A[2] * x + A[3] * y)};
  if (params_.v_flip) px.v = static_cast<double>(params_.height - 1) - px.v;
  return px;
}

Pixel CameraModel::forward_project_raw(const SphericalAngles& angles) const {
  const double polar = polar_angle(angles);
  if (!in_range(polar)) {
    throw Error(ErrorCode::OutOfRange, "polar angle " + std::to_string(polar) +
                                           " outside [theta_min, theta_max]");
  }
  return raw_pixel_unchecked(angles);
}

double CameraModel::invert_radial(double r_target) const {
  const bool increasing = r_at_max_ > r_at_min_;
  const double r_lo = increasing ? r_at_min_ : r_at_max_;
  const double r_hi = increasing ? r_at_max_ : r_at_min_;
  if (!(r_target >= r_lo && r_target <= r_hi)) {
    throw Error(ErrorCode::OutOfRange, "radius " + std::to_string(r_target) +
                                           " outside the achievable interval");
  }
  if (r_target == r_at_min_) return params_.theta_min;
  if (r_target == r_at_max_) return params_.theta_max;

  const double tolerance = 1e-9 * std::max(1.0, std::abs(r_target));
  // Bracket [lo, hi] with f(lo) < 0 < f(hi) in the increasing orientation.
  double lo = params_.theta_min;
  double hi = params_.theta_max;
  double theta = lo + (hi - lo) * (r_target - r_at_min_) / (r_at_max_ - r_at_min_);
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    const double f = horner(theta) - r_target;
    if (f == 0.0) return theta;
    if ((f < 0.0) == increasing) {
      lo = theta;
    } else {
      hi = theta;
    }
    const double slope = radial_derivative(theta);
    double next = slope != 0.0 ? theta - f / slope : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - theta);
    theta = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta)) ||
        hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi))) {
      break;
    }
  }
  if (std::abs(horner(theta) - r_target) > tolerance) {
    throw Error(ErrorCode::NoConvergence, "radial inversion did not converge");
  }
  return theta;
}

SphericalAngles equi_to_angles(double u, double v, int width, int height) {
  return {kTwoPi / width * u - kPi, kPi / 2.0 - kPi / height * v};
}

SphericalAngles angles_of(const Vec3& p) {
  const double rho = std::sqrt(p.x * p.x + p.y * p.y);
  return {wrap_azimuth(std::atan2(p.y, p.x)), std::atan2(p.z, rho)};
}

Projection project_point(const Vec3& p, View view, const CameraModel& model, int width,
                         int height) {
  if (norm(p) < 1e-9) throw Error(ErrorCode::DegeneratePoint, "point at the camera center");
  const SphericalAngles angles = angles_of(p);
  Projection out;
  const bool angle_ok = model.in_range(polar_angle(angles));
  if (view == View::Raw) {
    out.pixel = model.raw_pixel_unchecked(angles);
    if (width != model.raw_width()) {
      out.pixel.u *= static_cast<double>(width) / model.raw_width();
    }
    if (height != model.raw_height()) {
      out.pixel.v *= static_cast<double>(height) / model.raw_height();
    }
    out.valid = angle_ok && out.pixel.u >= 0.0 && out.pixel.u <= width - 1.0 &&
                out.pixel.v >= 0.0 && out.pixel.v <= height - 1.0;
  } else {
    double u = (angles.phi + kPi) * width / kTwoPi;
    if (u >= width) u -= width;
    out.pixel = {u, (kPi / 2.0 - angles.theta) * height / kPi};
    out.valid = angle_ok && out.pixel.v >= 0.0 && out.pixel.v <= height - 1.0;
  }
  return out;
}

}  // namespace panocc
