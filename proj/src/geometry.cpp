#include "cyvortex/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cyvortex/error.hpp"

namespace cyv {

double wrap_angle(double theta) {
  double r = std::fmod(theta, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r;
}

double wrap_difference(double dtheta) { return std::remainder(dtheta, two_pi); }

double chart_distance(const StripPoint& p, const StripPoint& q) {
  return std::hypot(p.t - q.t, wrap_difference(p.theta - q.theta));
}

const char* to_string(MetricPreset preset) {
  switch (preset) {
    case MetricPreset::wormhole: return "wormhole";
    case MetricPreset::neck: return "neck";
    case MetricPreset::tabulated: return "tabulated";
  }
  return "?";
}

const char* to_string(End end) { return end == End::plus ? "plus" : "minus"; }

namespace {

double wormhole_lambda(double mass, double t) {
  const double s = std::exp(0.5 * t) + 0.5 * mass * std::exp(-0.5 * t);
  const double s2 = s * s;
  return s2 * s2;
}

double row_mean(const TabulatedSamples& tab, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < tab.n_theta; ++j) s += tab.values[i * tab.n_theta + j];
  return s / static_cast<double>(tab.n_theta);
}

// Fractional row coordinate of t; nodes are snapped so that node queries are exact.
double table_coordinate(const TabulatedSamples& tab, double t) {
  const double u = (t - tab.t_min) / tab.dt;
  const double top = static_cast<double>(tab.n_t - 1);
  if (u < -1e-9 || u > top + 1e-9) {
    std::ostringstream msg;
    msg << "t = " << t << " outside tabulated range [" << tab.t_min << ", " << tab.t_max() << "]";
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9) return r;
  return std::clamp(u, 0.0, top);
}

void validate_table(const TabulatedSamples& tab) {
  if (tab.n_t < 2 || tab.n_theta < 1 || !(tab.dt > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tabulated metric needs at least two t rows and dt > 0");
  }
  if (tab.values.size() != tab.n_t * tab.n_theta) {
    throw Error(ErrorCode::invalid_argument, "tabulated metric has the wrong number of samples");
  }
  for (std::size_t k = 0; k < tab.values.size(); ++k) {
    const double v = tab.values[k];
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "nonpositive conformal factor sample " << v << " at t = "
          << tab.t_min + tab.dt * static_cast<double>(k / tab.n_theta) << ", theta index "
          << k % tab.n_theta;
      throw Error(ErrorCode::invalid_argument, msg.str());
    }
  }
  if (!(tab.t_min < 0.0 && tab.t_max() > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tabulated metric must cover both ends (t_min < 0 < t_max)");
  }
}

}  // namespace

CylinderMetric CylinderMetric::make(MetricPreset preset, const MetricParams& params) {
  if (!(params.alpha_target > 1.0)) {
    throw Error(ErrorCode::invalid_argument, "alpha_target must exceed 1");
  }
  CylinderMetric m;
  m.preset_ = preset;
  m.params_ = params;

  switch (preset) {
    case MetricPreset::neck: {
      const double raw = -0.5 * std::log(std::sqrt(params.alpha_target) - 1.0);
      m.t_plus_ = m.t_minus_ = std::max(0.0, raw);
      break;
    }
    case MetricPreset::wormhole: {
      if (!(params.mass > 0.0) || !std::isfinite(params.mass)) {
        throw Error(ErrorCode::invalid_argument, "wormhole mass must be positive");
      }
      const double center = std::log(0.5 * params.mass);
      const double raw = std::log(0.5 * params.mass / (std::pow(params.alpha_target, 0.25) - 1.0));
      m.t_plus_ = std::max({0.0, raw, center});
      m.t_minus_ = std::max({0.0, raw - 2.0 * center, -center});
      break;
    }
    case MetricPreset::tabulated: {
      if (!params.table) throw Error(ErrorCode::invalid_argument, "tabulated metric without samples");
      const TabulatedSamples& tab = *params.table;
      validate_table(tab);
      m.flat_c2_plus_ = row_mean(tab, tab.n_t - 1) * std::exp(-2.0 * tab.t_max());
      m.flat_c2_minus_ = row_mean(tab, 0) * std::exp(2.0 * tab.t_min);
      auto row_within = [&](std::size_t i, End end) {
        const double t = tab.t_min + tab.dt * static_cast<double>(i);
        const double flat = m.flat_factor(end, t);
        for (std::size_t j = 0; j < tab.n_theta; ++j) {
          const double r = tab.values[i * tab.n_theta + j] / flat;
          if (r > params.alpha_target || r < 1.0 / params.alpha_target) return false;
        }
        return true;
      };
      std::size_t i = tab.n_t - 1;
      while (i > 0 && tab.t_min + tab.dt * static_cast<double>(i - 1) >= 0.0 && row_within(i - 1, End::plus)) --i;
      m.t_plus_ = std::max(0.0, tab.t_min + tab.dt * static_cast<double>(i));
      std::size_t k = 0;
      while (k + 1 < tab.n_t && tab.t_min + tab.dt * static_cast<double>(k + 1) <= 0.0 && row_within(k + 1, End::minus)) ++k;
      m.t_minus_ = std::max(0.0, -(tab.t_min + tab.dt * static_cast<double>(k)));
      break;
    }
  }

  // alpha: largest distortion on either end region.
  if (preset == MetricPreset::tabulated) {
    const TabulatedSamples& tab = *params.table;
    double alpha = 1.0;
    for (std::size_t i = 0; i < tab.n_t; ++i) {
      const double t = tab.t_min + tab.dt * static_cast<double>(i);
      End end;
      if (t >= m.t_plus_ - 1e-12) end = End::plus;
      else if (t <= -m.t_minus_ + 1e-12) end = End::minus;
      else continue;
      const double flat = m.flat_factor(end, t);
      for (std::size_t j = 0; j < tab.n_theta; ++j) {
        const double r = tab.values[i * tab.n_theta + j] / flat;
        alpha = std::max({alpha, r, 1.0 / r});
      }
    }
    m.alpha_ = alpha;
  } else {
    const double rp = m.flat_ratio(End::plus, m.t_plus_);
    const double rm = m.flat_ratio(End::minus, -m.t_minus_);
    m.alpha_ = std::max({rp, 1.0 / rp, rm, 1.0 / rm});
  }
  if (m.alpha_ > params.alpha_max) {
    std::ostringstream msg;
    msg << "flatness bound alpha = " << m.alpha_ << " exceeds alpha_max = " << params.alpha_max;
    m.warnings_.push_back(msg.str());
  }
  return m;
}

double CylinderMetric::conformal_factor(const StripPoint& p) const { return conformal_factor(p.t, p.theta); }

double CylinderMetric::conformal_factor(double t, double theta) const {
  switch (preset_) {
    case MetricPreset::neck: {
      const double c = std::cosh(t);
      return c * c;
    }
    case MetricPreset::wormhole:
      return wormhole_lambda(params_.mass, t);
    case MetricPreset::tabulated: {
      const TabulatedSamples& tab = *params_.table;
      const double u = table_coordinate(tab, t);
      auto i0 = static_cast<std::size_t>(std::floor(u));
      if (i0 >= tab.n_t - 1) i0 = tab.n_t - 2;
      const double fu = u - static_cast<double>(i0);
      const double v = wrap_angle(theta) / (two_pi / static_cast<double>(tab.n_theta));
      auto j0 = static_cast<std::size_t>(std::floor(v));
      if (j0 >= tab.n_theta) j0 = tab.n_theta - 1;
      double fv = v - static_cast<double>(j0);
      if (std::abs(fv) < 1e-9) fv = 0.0;
      const std::size_t j1 = (j0 + 1) % tab.n_theta;
      auto at = [&](std::size_t i, std::size_t j) { return tab.values[i * tab.n_theta + j]; };
      const double lo = (fv == 0.0) ? at(i0, j0) : (1.0 - fv) * at(i0, j0) + fv * at(i0, j1);
      if (fu == 0.0) return lo;
      const double hi = (fv == 0.0) ? at(i0 + 1, j0) : (1.0 - fv) * at(i0 + 1, j0) + fv * at(i0 + 1, j1);
      if (fu == 1.0) return hi;
      return (1.0 - fu) * lo + fu * hi;
    }
  }
  return 1.0;
}

double CylinderMetric::mean_conformal_factor(double t) const {
  if (preset_ != MetricPreset::tabulated) return conformal_factor(t, 0.0);
  const TabulatedSamples& tab = *params_.table;
  const double u = table_coordinate(tab, t);
  auto i0 = static_cast<std::size_t>(std::floor(u));
  if (i0 >= tab.n_t - 1) i0 = tab.n_t - 2;
  const double fu = u - static_cast<double>(i0);
  const double lo = row_mean(tab, i0);
  if (fu == 0.0) return lo;
  return (1.0 - fu) * lo + fu * row_mean(tab, i0 + 1);
}

double CylinderMetric::flat_factor(End end, double t) const {
  switch (preset_) {
    case MetricPreset::neck:
      return 0.25 * std::exp(end == End::plus ? 2.0 * t : -2.0 * t);
    case MetricPreset::wormhole: {
      const double center = std::log(0.5 * params_.mass);
      const double s = end == End::plus ? t : 2.0 * center - t;
      return std::exp(2.0 * s);
    }
    case MetricPreset::tabulated:
      return end == End::plus ? flat_c2_plus_ * std::exp(2.0 * t) : flat_c2_minus_ * std::exp(-2.0 * t);
  }
  return 1.0;
}

double CylinderMetric::flat_ratio(End end, double t) const { return mean_conformal_factor(t) / flat_factor(end, t); }

double CylinderMetric::t_flat() const { return std::max(t_plus_, t_minus_); }

double CylinderMetric::reflection_center() const {
  if (preset_ == MetricPreset::wormhole) return std::log(0.5 * params_.mass);
  return 0.0;
}

double CylinderMetric::end_radius(End end, double t) const {
  const bool inside = end == End::plus ? t >= t_plus_ - 1e-12 : t <= -t_minus_ + 1e-12;
  if (!inside) {
    std::ostringstream msg;
    msg << "end_radius: t = " << t << " is not beyond the " << to_string(end) << " end threshold "
        << (end == End::plus ? t_plus_ : -t_minus_);
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  switch (preset_) {
    case MetricPreset::neck:
      return std::cosh(t);
    case MetricPreset::wormhole:
      return std::sqrt(wormhole_lambda(params_.mass, t));
    case MetricPreset::tabulated:
      return tabulated_radius(end, t);
  }
  return 0.0;
}

double CylinderMetric::end_radius(double t) const {
  return end_radius(t >= reflection_center() ? End::plus : End::minus, t);
}

double CylinderMetric::tabulated_radius(End end, double t) const {
  const TabulatedSamples& tab = *params_.table;
  const double t0 = end == End::plus ? t_plus_ : -t_minus_;
  const double c = std::sqrt(end == End::plus ? flat_c2_plus_ : flat_c2_minus_);
  const double base = c * std::exp(end == End::plus ? t0 : -t0);
  // Trapezoid rule for the integral of sqrt(mean lambda) with breakpoints at table rows.
  const double a = std::min(t0, t);
  const double b = std::max(t0, t);
  std::vector<double> nodes{a};
  for (std::size_t i = 0; i < tab.n_t; ++i) {
    const double ti = tab.t_min + tab.dt * static_cast<double>(i);
    if (ti > a + 1e-12 && ti < b - 1e-12) nodes.push_back(ti);
  }
  nodes.push_back(b);
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    integral += 0.5 * (nodes[k + 1] - nodes[k]) *
                (std::sqrt(mean_conformal_factor(nodes[k])) + std::sqrt(mean_conformal_factor(nodes[k + 1])));
  }
  return base + integral;
}

bool CylinderMetric::covers(double T) const {
  if (preset_ != MetricPreset::tabulated) return true;
  const TabulatedSamples& tab = *params_.table;
  return tab.t_min <= -T + 1e-9 && tab.t_max() >= T - 1e-9;
}

}  // namespace cyv
