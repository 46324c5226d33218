/// @file singular_part.hpp
/// @brief Singular ansatz ubar carrying the vortex sources, S = e^ubar and the
/// compactly supported source h = -Lap_g ubar + 4 pi sum m_k delta_{p_k}.
///
/// Around each center ubar is the chart logarithm 2 m ln(rho/eps1), cut off
/// smoothly by a C^3 degree-7 step over the annulus eps1/2 <= rho <= eps1.
/// Since Lap_g = lambda^{-1} Lap_0 in isothermal coordinates and
/// Lap_0 ln rho = 2 pi delta_0, the logarithm carries the sources exactly.
#pragma once

#include <array>
#include <vector>

#include "cyvortex/geometry.hpp"

namespace cyv {

struct Vortex {
  StripPoint center;
  int multiplicity = 1;
};

/// Prescribed vortex centers; coincident centers are merged by adding
/// multiplicities.
class VortexSet {
 public:
  VortexSet() = default;
  explicit VortexSet(const std::vector<Vortex>& vortices);

  void add(const StripPoint& p, int multiplicity);
  const std::vector<Vortex>& vortices() const { return vortices_; }
  /// Total vortex number N = sum m_k.
  int total() const;
  bool empty() const { return vortices_.empty(); }

 private:
  std::vector<Vortex> vortices_;
};

/// Cutoff step: 1 for s <= 1/2, 0 for s >= 1, C^3 and monotone in between.
double cutoff_step(double s);
double cutoff_step_d1(double s);
double cutoff_step_d2(double s);

/// eps1 = scale * min(1, pi/4, pairwise distance / 4, boundary clearance / 4),
/// where the clearance of a center is T - |t_k|. Throws Error(resolution) when
/// eps1 < 4 * max_spacing or a center is outside the strip.
double cutoff_radius(const VortexSet& vortices, double T, double max_spacing, double scale = 1.0);

class SingularData {
 public:
  SingularData(VortexSet vortices, double epsilon1);

  double epsilon1() const { return epsilon1_; }
  const VortexSet& vortices() const { return vortices_; }

  /// ubar(p); -infinity exactly at a center.
  double ubar(const StripPoint& p) const;
  /// S = e^ubar, in [0, 1].
  double S(const StripPoint& p) const;
  /// Chart gradient (d/dt, d/dtheta) of ubar.
  std::array<double, 2> grad_ubar(const StripPoint& p) const;
  /// Chart Laplacian of ubar away from the centers (closed form).
  double chart_laplacian_ubar(const StripPoint& p) const;
  /// Closed-form source h = -lambda^{-1} Lap_0 ubar, zero outside the annuli.
  double source(const StripPoint& p, const CylinderMetric& metric) const;

 private:
  VortexSet vortices_;
  double epsilon1_;
};

}  // namespace cyv
