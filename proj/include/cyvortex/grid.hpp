/// @file grid.hpp
/// @brief Uniform tensor grid on the truncated strip [-T, T] x [0, 2pi).
///
/// Nodes sit at t_i = -T + i dt (i = 0..n_t-1) and theta_j = j dtheta
/// (j = 0..n_theta-1). theta is periodic; rows 0 and n_t-1 carry Dirichlet data.
/// All reductions run row by row and combine the row partials pairwise, so
/// every scalar produced here is independent of the worker count.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cyvortex/geometry.hpp"

namespace cyv {

class StripGrid {
 public:
  /// Throws Error(invalid_argument) unless T > 0, n_t >= 9, n_theta >= 8 and even.
  StripGrid(double T, std::size_t n_t, std::size_t n_theta);

  double T() const { return T_; }
  std::size_t n_t() const { return n_t_; }
  std::size_t n_theta() const { return n_theta_; }
  double dt() const { return dt_; }
  double dtheta() const { return dtheta_; }
  double max_spacing() const { return dt_ > dtheta_ ? dt_ : dtheta_; }
  std::size_t size() const { return n_t_ * n_theta_; }

  double t(std::size_t i) const { return -T_ + dt_ * static_cast<double>(i); }
  double theta(std::size_t j) const { return dtheta_ * static_cast<double>(j); }
  StripPoint node(std::size_t i, std::size_t j) const { return {t(i), theta(j)}; }

  /// Nearest cell center (i + 1/2, j + 1/2) to p; vortex centers are snapped here.
  StripPoint snap_to_cell_center(const StripPoint& p) const;

  /// Non-empty when dt/dtheta lies outside [1/4, 4].
  std::string aspect_warning() const;

  bool operator==(const StripGrid& o) const {
    return T_ == o.T_ && n_t_ == o.n_t_ && n_theta_ == o.n_theta_;
  }

 private:
  double T_;
  std::size_t n_t_;
  std::size_t n_theta_;
  double dt_;
  double dtheta_;
};

/// Row-major node values, indexed (i_t, j_theta).
class GridField {
 public:
  GridField() = default;
  GridField(std::size_t n_t, std::size_t n_theta, double fill = 0.0)
      : n_t_(n_t), n_theta_(n_theta), values_(n_t * n_theta, fill) {}
  explicit GridField(const StripGrid& g, double fill = 0.0) : GridField(g.n_t(), g.n_theta(), fill) {}

  std::size_t n_t() const { return n_t_; }
  std::size_t n_theta() const { return n_theta_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_theta_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return values_[i * n_theta_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * n_theta_, n_theta_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_theta_, n_theta_}; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool matches(const StripGrid& g) const { return n_t_ == g.n_t() && n_theta_ == g.n_theta(); }
  bool all_finite() const;

  bool operator==(const GridField&) const = default;

 private:
  std::size_t n_t_ = 0;
  std::size_t n_theta_ = 0;
  std::vector<double> values_;
};

/// Throws Error(shape_mismatch) if f does not live on g.
void require_shape(const StripGrid& g, const GridField& f, const char* what);

/// Samples a pointwise function on every node; throws on a non-finite value.
GridField sample(const StripGrid& g, const std::function<double(const StripPoint&)>& sampler);

/// Conformal factor on the nodes.
GridField sample_conformal_factor(const StripGrid& g, const CylinderMetric& metric);

/// Flat 5-point Laplacian on interior rows (periodic in theta, stored values
/// used on the Dirichlet rows); zero on rows 0 and n_t-1.
GridField chart_laplacian(const StripGrid& g, const GridField& f);

/// Laplace-Beltrami operator: lambda^{-1} times the chart Laplacian.
GridField laplacian_apply(const StripGrid& g, const GridField& lambda, const GridField& f);
GridField laplacian_apply(const StripGrid& g, const CylinderMetric& metric, const GridField& f);

/// Trapezoid weight of row i in t (1/2 on the Dirichlet rows).
inline double trapezoid_weight(const StripGrid& g, std::size_t i) {
  return (i == 0 || i + 1 == g.n_t()) ? 0.5 : 1.0;
}

/// Integral of f over the strip with respect to dV_g = lambda dt dtheta.
double integrate(const StripGrid& g, const GridField& lambda, const GridField& f);
double integrate(const StripGrid& g, const CylinderMetric& metric, const GridField& f);

/// Integral of f with respect to the chart measure dt dtheta.
double integrate_chart(const StripGrid& g, const GridField& f);

/// Edge-based chart Dirichlet energy sum |grad_0 f|^2 dt dtheta. Its gradient
/// with respect to interior values is exactly -2 (chart Laplacian) dt dtheta.
double chart_dirichlet_energy(const StripGrid& g, const GridField& f);

/// Central-difference chart derivatives (one-sided second order on the Dirichlet rows).
GridField derivative_t(const StripGrid& g, const GridField& f);
GridField derivative_theta(const StripGrid& g, const GridField& f);

double dot(const GridField& a, const GridField& b);
double max_abs(const GridField& f);

}  // namespace cyv
