#include "cyvortex/singular_part.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "cyvortex/error.hpp"

namespace cyv {

VortexSet::VortexSet(const std::vector<Vortex>& vortices) {
  for (const auto& v : vortices) add(v.center, v.multiplicity);
}

void VortexSet::add(const StripPoint& p, int multiplicity) {
  if (multiplicity < 1) throw Error(ErrorCode::invalid_argument, "vortex multiplicity must be a positive integer");
  for (auto& v : vortices_) {
    if (chart_distance(v.center, p) < 1e-12) {
      v.multiplicity += multiplicity;
      return;
    }
  }
  vortices_.push_back({p, multiplicity});
}

int VortexSet::total() const {
  int n = 0;
  for (const auto& v : vortices_) n += v.multiplicity;
  return n;
}

// With x = 2s - 1 the step is 1 - P(x), P(x) = 35x^4 - 84x^5 + 70x^6 - 20x^7.
double cutoff_step(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double x = 2.0 * s - 1.0;
  const double x4 = x * x * x * x;
  return 1.0 - x4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

double cutoff_step_d1(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double x = 2.0 * s - 1.0;
  const double y = x * (1.0 - x);
  return -2.0 * 140.0 * y * y * y;
}

double cutoff_step_d2(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double x = 2.0 * s - 1.0;
  const double y = x * (1.0 - x);
  return -4.0 * 420.0 * y * y * (1.0 - 2.0 * x);
}

double cutoff_radius(const VortexSet& vortices, double T, double max_spacing, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorCode::invalid_argument, "epsilon scale must lie in (0, 1]");
  double eps = std::min(1.0, std::numbers::pi / 4.0);
  std::string limiter = "the default radius";
  const auto& vs = vortices.vortices();
  for (std::size_t a = 0; a < vs.size(); ++a) {
    const double clearance = T - std::abs(vs[a].center.t);
    if (clearance <= 0.0) {
      std::ostringstream msg;
      msg << "vortex at t = " << vs[a].center.t << " lies outside the truncated strip |t| < " << T;
      throw Error(ErrorCode::resolution, msg.str());
    }
    if (clearance / 4.0 < eps) {
      eps = clearance / 4.0;
      std::ostringstream why;
      why << "the boundary clearance " << clearance << " of the vortex at t = " << vs[a].center.t;
      limiter = why.str();
    }
    for (std::size_t b = a + 1; b < vs.size(); ++b) {
      const double d = chart_distance(vs[a].center, vs[b].center);
      if (d / 4.0 < eps) {
        eps = d / 4.0;
        std::ostringstream why;
        why << "the separation " << d << " of vortices " << a << " and " << b;
        limiter = why.str();
      }
    }
  }
  eps *= scale;
  if (!vs.empty() && eps < 4.0 * max_spacing) {
    std::ostringstream msg;
    msg << "cutoff radius eps1 = " << eps << " (set by " << limiter << ") is below 4 x grid spacing = "
        << 4.0 * max_spacing << "; refine the grid to spacing <= " << eps / 4.0 << " or enlarge " << limiter;
    throw Error(ErrorCode::resolution, msg.str());
  }
  return eps;
}

SingularData::SingularData(VortexSet vortices, double epsilon1) : vortices_(std::move(vortices)), epsilon1_(epsilon1) {
  if (!(epsilon1 > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon1 must be positive");
}

double SingularData::ubar(const StripPoint& p) const {
  double sum = 0.0;
  for (const auto& v : vortices_.vortices()) {
    const double rho = chart_distance(p, v.center);
    if (rho >= epsilon1_) continue;
    if (rho == 0.0) return -std::numeric_limits<double>::infinity();
    const double s = rho / epsilon1_;
    sum += 2.0 * v.multiplicity * cutoff_step(s) * std::log(s);
  }
  return sum;
}

double SingularData::S(const StripPoint& p) const { return std::exp(ubar(p)); }

std::array<double, 2> SingularData::grad_ubar(const StripPoint& p) const {
  std::array<double, 2> g{0.0, 0.0};
  for (const auto& v : vortices_.vortices()) {
    const double dt = p.t - v.center.t;
    const double dq = wrap_difference(p.theta - v.center.theta);
    const double rho = std::hypot(dt, dq);
    if (rho >= epsilon1_ || rho == 0.0) continue;
    const double s = rho / epsilon1_;
    const double dpsi = 2.0 * v.multiplicity / epsilon1_ * (cutoff_step_d1(s) * std::log(s) + cutoff_step(s) / s);
    g[0] += dpsi * dt / rho;
    g[1] += dpsi * dq / rho;
  }
  return g;
}

double SingularData::chart_laplacian_ubar(const StripPoint& p) const {
  double sum = 0.0;
  for (const auto& v : vortices_.vortices()) {
    const double rho = chart_distance(p, v.center);
    const double s = rho / epsilon1_;
    if (s <= 0.5 || s >= 1.0) continue;
    const double ls = std::log(s);
    sum += 2.0 * v.multiplicity / (epsilon1_ * epsilon1_) *
           (cutoff_step_d2(s) * ls + cutoff_step_d1(s) * (2.0 + ls) / s);
  }
  return sum;
}

double SingularData::source(const StripPoint& p, const CylinderMetric& metric) const {
  const double lap = chart_laplacian_ubar(p);
  if (lap == 0.0) return 0.0;
  return -lap / metric.conformal_factor(p);
}

}  // namespace cyv
