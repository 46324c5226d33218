#include "cyvortex/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "cyvortex/error.hpp"

namespace cyv {

void validate(const UnitsLedger& units) {
  if (units.sign != 1 && units.sign != -1) throw Error(ErrorCode::invalid_argument, "sign must be +1 or -1");
  if (std::abs(units.kappa - 2.0 * units.e * units.e * units.v * units.v) > 1e-12 * units.kappa) {
    throw Error(ErrorCode::invalid_argument, "units must satisfy kappa = 2 e^2 v^2");
  }
}

const char* to_string(DecayQuantity q) { return q == DecayQuantity::w ? "w" : "grad_w"; }

namespace {

// Width of the log-Gaussian reference used to differentiate w. Small enough
// that the reference is negligible (< 1e-17) across the theta seam.
constexpr double reference_width = 0.5;
// The reference is used within this chart distance of a center.
constexpr double reference_reach = 2.0 * reference_width;

// m ln(1 - exp(-rho^2 / sigma^2)) per center: same logarithmic singularity as
// w, smooth otherwise, with derivatives of order sigma^{-k} only.
double reference_log(const VortexSet& vs, const StripPoint& p) {
  double s = 0.0;
  for (const auto& v : vs.vortices()) {
    const double dt = p.t - v.center.t;
    const double dq = wrap_difference(p.theta - v.center.theta);
    const double x = (dt * dt + dq * dq) / (reference_width * reference_width);
    s += v.multiplicity * std::log(-std::expm1(-x));
  }
  return s;
}

std::array<double, 2> reference_log_gradient(const VortexSet& vs, const StripPoint& p) {
  std::array<double, 2> d{0.0, 0.0};
  for (const auto& v : vs.vortices()) {
    const double dt = p.t - v.center.t;
    const double dq = wrap_difference(p.theta - v.center.theta);
    const double s2 = reference_width * reference_width;
    const double x = (dt * dt + dq * dq) / s2;
    // d/dx ln(1 - e^{-x}) = 1 / (e^x - 1)
    const double g = v.multiplicity / std::expm1(x) * 2.0 / s2;
    d[0] += g * dt;
    d[1] += g * dq;
  }
  return d;
}

}  // namespace

std::pair<GridField, GridField> grad_w(const Problem& problem, const FieldSolution& solution) {
  const StripGrid& g = problem.grid();
  const VortexSet& vs = problem.vortices();
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  // Tails decay like e^{-r_e} with r_e growing exponentially in t, so they are
  // not resolved by differences of w itself. ln(-w) is close to -r_e and
  // smooth, and d w = w d ln(-w) keeps full relative accuracy there.
  GridField logw(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = solution.w.values()[k];
    logw.values()[k] = w < 0.0 ? std::log(-w) : std::numeric_limits<double>::quiet_NaN();
  }
  const GridField lt = derivative_t(g, logw);
  const GridField lq = derivative_theta(g, logw);
  GridField gt = derivative_t(g, solution.w);
  GridField gq = derivative_theta(g, solution.w);
  for (std::size_t i = 1; i + 1 < nt; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      if (!std::isfinite(lt(i, j)) || !std::isfinite(lq(i, j))) continue;
      gt(i, j) = solution.w(i, j) * lt(i, j);
      gq(i, j) = solution.w(i, j) * lq(i, j);
    }
  }
  if (vs.empty()) return {std::move(gt), std::move(gq)};
  // Near the centers, differentiate the smooth remainder w - ref by central
  // differences and add the reference gradient in closed form.
  GridField rem = solution.w;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nq; ++j) rem(i, j) -= reference_log(vs, g.node(i, j));
  }
  const GridField rt = derivative_t(g, rem);
  const GridField rq = derivative_theta(g, rem);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const StripPoint p = g.node(i, j);
      bool near = false;
      for (const auto& v : vs.vortices()) near = near || chart_distance(p, v.center) < reference_reach;
      if (!near) continue;
      const auto d = reference_log_gradient(vs, p);
      gt(i, j) = rt(i, j) + d[0];
      gq(i, j) = rq(i, j) + d[1];
    }
  }
  return {std::move(gt), std::move(gq)};
}

PhysicalFields reconstruct(const Problem& problem, const FieldSolution& solution, const UnitsLedger& units) {
  validate(units);
  if (!solution.converged()) throw Error(ErrorCode::not_converged, "cannot reconstruct fields from an unconverged solve");
  const StripGrid& g = problem.grid();
  require_shape(g, solution.w, "w");
  const auto [gt, gq] = grad_w(problem, solution);
  const double s = static_cast<double>(units.sign);
  PhysicalFields f{GridField(g), GridField(g), GridField(g), GridField(g), GridField(g), GridField(g), GridField(g)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = solution.w.values()[k];
    const double ew = std::exp(w);
    const double em = std::expm1(w);
    const double lam = problem.lambda().values()[k];
    const double grad2 = gt.values()[k] * gt.values()[k] + gq.values()[k] * gq.values()[k];
    f.phi_sq.values()[k] = ew;
    f.Ftilde12.values()[k] = s * 0.5 * ew * em;
    f.A0.values()[k] = -s * 0.5 * em;
    f.kinetic.values()[k] = ew * grad2 / (2.0 * lam);
    f.electric.values()[k] = 0.25 * ew * em * em;
    f.potential_density.values()[k] = 0.25 * ew * em * em;
    f.T00.values()[k] = f.kinetic.values()[k] + f.electric.values()[k] + f.potential_density.values()[k];
  }
  return f;
}

double total_flux(const PhysicalFields& fields, const Problem& problem) {
  return integrate(problem.grid(), problem.lambda(), fields.Ftilde12);
}

double total_energy(const PhysicalFields& fields, const Problem& problem) {
  return integrate(problem.grid(), problem.lambda(), fields.T00);
}

std::size_t sign_ledger_violations(const PhysicalFields& fields, const UnitsLedger& units) {
  const double s = static_cast<double>(units.sign);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < fields.T00.size(); ++k) {
    if (s * fields.Ftilde12.values()[k] > 0.0 || s * fields.A0.values()[k] < 0.0 || fields.T00.values()[k] < 0.0) ++bad;
  }
  return bad;
}

namespace {

std::vector<double> row_profile(const Problem& problem, const FieldSolution& solution, DecayQuantity quantity) {
  const StripGrid& g = problem.grid();
  std::vector<double> q(g.n_t(), 0.0);
  if (quantity == DecayQuantity::w) {
    for (std::size_t i = 0; i < g.n_t(); ++i) {
      for (double v : solution.w.row(i)) q[i] = std::max(q[i], std::abs(v));
    }
    return q;
  }
  const auto [gt, gq] = grad_w(problem, solution);
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    for (std::size_t j = 0; j < g.n_theta(); ++j) {
      const double mag = std::hypot(gt(i, j), gq(i, j)) / std::sqrt(problem.lambda()(i, j));
      q[i] = std::max(q[i], mag);
    }
  }
  return q;
}

}  // namespace

DecayReport fit_decay(const Problem& problem, const FieldSolution& solution, End end, DecayQuantity quantity,
                      const DecayOptions& options) {
  const StripGrid& g = problem.grid();
  const CylinderMetric& metric = problem.metric();
  DecayReport rep;
  rep.end = end;
  rep.quantity = quantity;
  const std::vector<double> q = row_profile(problem, solution, quantity);

  // Walk outward along the chosen end, in rows, from the threshold.
  const double threshold = metric.end_threshold(end);
  const double t_edge = g.T() - options.edge_margin;
  const bool explicit_window = options.t2 > options.t1;
  const double lo = explicit_window ? std::max(options.t1, threshold) : threshold;
  const double hi = explicit_window ? std::min(options.t2, t_edge) : t_edge;
  std::vector<double> xs, ys;
  bool hit_floor = false;
  const std::size_t nt = g.n_t();
  for (std::size_t k = 0; k < nt; ++k) {
    const std::size_t i = end == End::plus ? nt / 2 + k : (nt - 1) / 2 - k;
    if (i >= nt) break;
    const double t = g.t(i);
    const double dist = end == End::plus ? t : -t;
    if (dist < lo - 1e-12) continue;
    if (dist > hi + 1e-12) break;
    if (!(q[i] >= options.floor)) {
      hit_floor = true;
      break;
    }
    if (xs.empty()) rep.t1 = t;
    rep.t2 = t;
    xs.push_back(metric.end_radius(end, t));
    ys.push_back(std::log(q[i]));
  }
  rep.points = static_cast<int>(xs.size());
  rep.window_truncated = !explicit_window && !hit_floor;
  if (xs.size() < 3) {
    std::ostringstream msg;
    msg << "decay window on the " << to_string(end) << " end holds " << xs.size()
        << " rows above the floor " << options.floor << "; shrink the floor or lengthen the domain";
    rep.message = msg.str();
    return rep;
  }
  rep.r1 = xs.front();
  rep.r2 = xs.back();
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  double log_env = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (intercept + slope * xs[k]);
    ss_res += e * e;
    log_env = std::max(log_env, ys[k] - slope * xs[k]);
  }
  rep.b_fit = -slope;
  rep.a_fit = std::exp(intercept);
  rep.a_envelope = std::exp(log_env);
  rep.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  rep.ok = !rep.window_truncated;
  if (rep.window_truncated) {
    std::ostringstream msg;
    msg << "window warning: the " << to_string(end) << " tail of " << to_string(quantity)
        << " is still above the floor at |t| = " << hi << " (r_e = " << rep.r2
        << "); the domain is too short to resolve the exponential regime";
    rep.message = msg.str();
  }
  return rep;
}

NegativityReport check_negativity(const Problem& problem, const FieldSolution& solution,
                                  const std::vector<DecayReport>& w_fits) {
  const StripGrid& g = problem.grid();
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  // Tails below this are flushed to zero by the solver; a row whose largest
  // |w| is under it sits beyond the underflow frontier.
  constexpr double tiny = 1e-280;
  NegativityReport rep;
  rep.w_max = -std::numeric_limits<double>::infinity();
  auto row_underflowed = [&](std::size_t i) {
    for (double v : solution.w.row(i)) {
      if (std::abs(v) >= tiny) return false;
    }
    return true;
  };
  std::size_t lo = 0;
  while (lo + 1 < nt && row_underflowed(lo + 1)) ++lo;
  std::size_t hi = nt - 1;
  while (hi > lo + 1 && row_underflowed(hi - 1)) --hi;
  rep.frontier_minus = lo;
  rep.frontier_plus = hi;

  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const double w = solution.w(i, j);
      rep.w_max = std::max(rep.w_max, w);
      if (w > 0.0) ++rep.positive_nodes;
      const bool beyond = i <= lo || i >= hi;
      if (!beyond && w == 0.0 && !problem.in_vortex_cell(i, j)) ++rep.zero_nodes_inside;
    }
  }

  bool envelope_ok = true;
  for (const auto& fit : w_fits) {
    if (fit.quantity != DecayQuantity::w || fit.points < 3) continue;
    const CylinderMetric& metric = problem.metric();
    const bool plus = fit.end == End::plus;
    const std::size_t frontier = plus ? hi : lo;
    // The Dirichlet row itself needs no justification.
    if (frontier != (plus ? nt - 1 : 0)) {
      const double t = g.t(frontier);
      const double dist = plus ? t : -t;
      double env = 0.0;
      if (dist > metric.end_threshold(fit.end)) {
        env = fit.a_envelope * std::exp(-fit.b_fit * metric.end_radius(fit.end, t));
      }
      (plus ? rep.envelope_at_frontier_plus : rep.envelope_at_frontier_minus) = env;
      if (!(env < 1e-250)) envelope_ok = false;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = g.t(i);
      if (t < std::min(fit.t1, fit.t2) - 1e-12 || t > std::max(fit.t1, fit.t2) + 1e-12) continue;
      const double bound = -fit.a_envelope * std::exp(-fit.b_fit * metric.end_radius(fit.end, t));
      for (double w : solution.w.row(i)) {
        if (w < bound * (1.0 + 1e-12)) ++rep.bound_violations;
      }
    }
  }

  rep.ok = rep.positive_nodes == 0 && rep.zero_nodes_inside == 0 && rep.bound_violations == 0 && envelope_ok;
  std::ostringstream msg;
  if (rep.positive_nodes) msg << rep.positive_nodes << " nodes with w > 0; ";
  if (rep.zero_nodes_inside) msg << rep.zero_nodes_inside << " nodes with w = 0 inside the underflow frontier; ";
  if (rep.bound_violations) msg << rep.bound_violations << " nodes below the fitted lower bound; ";
  if (!envelope_ok) msg << "fitted envelope does not justify the underflow frontier; ";
  rep.message = msg.str();
  return rep;
}

}  // namespace cyv
