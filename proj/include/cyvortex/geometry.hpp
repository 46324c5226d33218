/// @file geometry.hpp
/// @brief The asymptotically flat cylinder in global isothermal coordinates.
///
/// The cylinder is the strip R x [0, 2pi) with metric g = lambda(t, theta)
/// (dt^2 + dtheta^2). Each end of the strip is compared against an exact flat
/// end lambda_flat(t) = C^2 e^{+-2t}; the largest distortion
/// max(lambda/lambda_flat, lambda_flat/lambda) beyond the end thresholds is the
/// flatness bound alpha.
#pragma once

#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace cyv {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi).
double wrap_angle(double theta);

/// Signed angular difference reduced into [-pi, pi].
double wrap_difference(double dtheta);

struct StripPoint {
  double t = 0.0;
  double theta = 0.0;

  StripPoint() = default;
  StripPoint(double t_, double theta_) : t(t_), theta(wrap_angle(theta_)) {}
};

/// theta-wrapped Euclidean distance in the isothermal chart.
double chart_distance(const StripPoint& p, const StripPoint& q);

enum class MetricPreset { wormhole, neck, tabulated };
enum class End { plus, minus };

const char* to_string(MetricPreset preset);
const char* to_string(End end);

/// Uniformly sampled conformal factor, theta-periodic (the 2pi column is not
/// stored). values is row-major: values[i_t * n_theta + j_theta].
struct TabulatedSamples {
  double t_min = 0.0;
  double dt = 0.0;
  std::size_t n_t = 0;
  std::size_t n_theta = 0;
  std::vector<double> values;

  double t_max() const { return t_min + dt * static_cast<double>(n_t - 1); }
};

struct MetricParams {
  double mass = 1.0;          // wormhole only
  double alpha_target = 1.25; // distortion allowed when locating the end thresholds
  double alpha_max = 100.0;   // above this a warning is recorded
  std::shared_ptr<const TabulatedSamples> table;  // tabulated only
};

class CylinderMetric {
 public:
  /// Validates parameters, locates the end thresholds and computes alpha.
  /// Throws Error(invalid_argument) on bad input.
  static CylinderMetric make(MetricPreset preset, const MetricParams& params);

  MetricPreset preset() const { return preset_; }
  const MetricParams& params() const { return params_; }

  double conformal_factor(const StripPoint& p) const;
  double conformal_factor(double t, double theta) const;

  /// theta-averaged conformal factor (exact for the closed-form presets).
  double mean_conformal_factor(double t) const;

  /// Exact flat-end factor of the given end.
  double flat_factor(End end, double t) const;

  /// Smallest |t| beyond which the end chart of that end is used.
  double end_threshold(End end) const { return end == End::plus ? t_plus_ : t_minus_; }
  /// max of the two end thresholds.
  double t_flat() const;
  double alpha() const { return alpha_; }

  /// Euclidean radius of the end chart. Requires t on that end beyond its
  /// threshold, otherwise throws Error(out_of_range).
  double end_radius(End end, double t) const;
  /// end_radius of whichever end contains t.
  double end_radius(double t) const;

  /// True when the metric can be evaluated on [-T, T].
  bool covers(double T) const;

  /// Center of the t-reflection isometry for closed-form presets.
  double reflection_center() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  CylinderMetric() = default;
  double flat_ratio(End end, double t) const;
  double tabulated_radius(End end, double t) const;

  MetricPreset preset_ = MetricPreset::neck;
  MetricParams params_;
  double t_plus_ = 0.0;
  double t_minus_ = 0.0;
  double alpha_ = 1.0;
  double flat_c2_plus_ = 1.0;   // tabulated flat-end fit coefficients
  double flat_c2_minus_ = 1.0;
  std::vector<std::string> warnings_;
};

}  // namespace cyv
