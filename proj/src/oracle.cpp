#include "cyvortex/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cyvortex/error.hpp"

namespace cyv {

namespace {

double sech(double t) { return 1.0 / std::cosh(t); }

}  // namespace

std::vector<std::string> case_names() { return {"zero", "gauss-cos", "sech-mode2", "vortex-gauss"}; }

ManufacturedCase named_case(const std::string& name) {
  ManufacturedCase c;
  c.name = name;
  if (name == "zero") {
    c.u_star = [](const StripPoint&) { return 0.0; };
    c.chart_laplacian = [](const StripPoint&) { return 0.0; };
  } else if (name == "gauss-cos") {
    // u* = -0.3 e^{-t^2} (1 + cos theta) / 2
    c.u_star = [](const StripPoint& p) { return -0.15 * std::exp(-p.t * p.t) * (1.0 + std::cos(p.theta)); };
    c.chart_laplacian = [](const StripPoint& p) {
      const double g = std::exp(-p.t * p.t);
      return -0.15 * ((4.0 * p.t * p.t - 2.0) * g * (1.0 + std::cos(p.theta)) - g * std::cos(p.theta));
    };
  } else if (name == "sech-mode2") {
    // u* = 0.2 sech^4 t sin 2 theta
    c.u_star = [](const StripPoint& p) { return 0.2 * std::pow(sech(p.t), 4) * std::sin(2.0 * p.theta); };
    c.chart_laplacian = [](const StripPoint& p) {
      const double s = sech(p.t), th = std::tanh(p.t);
      const double f = std::pow(s, 4);
      const double f2 = 16.0 * f * th * th - 4.0 * std::pow(s, 6);
      return 0.2 * std::sin(2.0 * p.theta) * (f2 - 4.0 * f);
    };
  } else if (name == "vortex-gauss") {
    // one unit vortex at (0, pi); u* = -0.4 e^{-(t-1/2)^2} (1 + cos(theta)/2)
    c.vortices = {{StripPoint(0.0, std::numbers::pi), 1}};
    c.u_star = [](const StripPoint& p) {
      const double d = p.t - 0.5;
      return -0.4 * std::exp(-d * d) * (1.0 + 0.5 * std::cos(p.theta));
    };
    c.chart_laplacian = [](const StripPoint& p) {
      const double d = p.t - 0.5;
      const double g = std::exp(-d * d);
      return -0.4 * ((4.0 * d * d - 2.0) * g * (1.0 + 0.5 * std::cos(p.theta)) - 0.5 * g * std::cos(p.theta));
    };
  } else {
    std::ostringstream msg;
    msg << "unknown manufactured case '" << name << "'";
    throw Error(ErrorCode::invalid_argument, msg.str());
  }
  return c;
}

Manufactured manufacture(const Problem& base, const ManufacturedCase& c) {
  const StripGrid& g = base.grid();
  GridField u_star = sample(g, c.u_star);
  for (std::size_t i : {std::size_t{0}, g.n_t() - 1}) {
    for (double v : u_star.row(i)) {
      if (std::abs(v) > 1e-13) {
        throw Error(ErrorCode::invalid_argument,
                    "manufactured field '" + c.name + "' does not vanish on the Dirichlet rows at this T");
      }
    }
    std::fill(u_star.row(i).begin(), u_star.row(i).end(), 0.0);
  }
  GridField q(g);
  for (std::size_t i = 1; i + 1 < g.n_t(); ++i) {
    for (std::size_t j = 0; j < g.n_theta(); ++j) {
      const StripPoint p = g.node(i, j);
      const double w = base.ubar()(i, j) + u_star(i, j);
      q(i, j) = c.chart_laplacian(p) / base.lambda()(i, j) - std::exp(w) * std::expm1(w) - base.source()(i, j);
    }
  }
  return {base.with_extra_source(q), std::move(u_star), std::move(q)};
}

std::vector<StudyRow> convergence_study(const ManufacturedCase& c, const CylinderMetric& metric, double T,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& grids,
                                        const SolverOptions& options) {
  if (grids.size() < 3) throw Error(ErrorCode::invalid_argument, "a convergence study needs at least 3 grids");
  std::vector<StudyRow> rows;
  for (const auto& [nt, nq] : grids) {
    StripGrid g(T, nt, nq);
    StudyRow row;
    row.n_t = nt;
    row.n_theta = nq;
    row.T = T;
    row.spacing = std::sqrt(g.dt() * g.dtheta());
    if (!rows.empty() && !(row.spacing < rows.back().spacing && nt >= rows.back().n_t && nq >= rows.back().n_theta)) {
      throw Error(ErrorCode::invalid_argument, "convergence study grids must refine monotonically");
    }
    // Manufactured problems are posed in the continuum, so the closed-form
    // source is used; the lattice source is only consistent for w itself.
    Problem base = Problem::build(g, metric, c.vortices, 1.0, SourceMode::analytic);
    Manufactured m = manufacture(base, c);
    FieldSolution sol = newton_solve(m.problem, options);
    row.converged = sol.converged();
    row.iterations = sol.iterations;
    double err = 0.0;
    for (std::size_t k = 0; k < sol.u.size(); ++k) err = std::max(err, std::abs(sol.u.values()[k] - m.u_star.values()[k]));
    row.max_error = err;
    row.order = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty() && rows.back().max_error > 0.0 && err > 0.0) {
      row.order = std::log(rows.back().max_error / err) / std::log(rows.back().spacing / row.spacing);
    }
    rows.push_back(row);
  }
  return rows;
}

const char* to_string(IsometryKind kind) {
  switch (kind) {
    case IsometryKind::identity: return "identity";
    case IsometryKind::theta_shift: return "theta_shift";
    case IsometryKind::t_reflection: return "t_reflection";
  }
  return "unknown";
}

std::vector<Vortex> transform_vortices(const std::vector<Vortex>& vortices, const Isometry& iso) {
  std::vector<Vortex> out;
  for (const auto& v : vortices) {
    Vortex w = v;
    if (iso.kind == IsometryKind::theta_shift) w.center = StripPoint(v.center.t, v.center.theta + iso.theta_shift);
    if (iso.kind == IsometryKind::t_reflection) w.center = StripPoint(-v.center.t, v.center.theta);
    out.push_back(w);
  }
  return out;
}

double symmetry_check(const StripGrid& grid, const CylinderMetric& metric, const GridField& a, const GridField& b,
                      const Isometry& iso) {
  require_shape(grid, a, "first field");
  require_shape(grid, b, "second field");
  const std::size_t nt = grid.n_t(), nq = grid.n_theta();
  std::size_t shift = 0;
  if (iso.kind == IsometryKind::theta_shift) {
    if (metric.preset() == MetricPreset::tabulated) {
      throw Error(ErrorCode::invalid_argument, "theta shifts are isometries only of theta-independent metrics");
    }
    const double cells = wrap_angle(iso.theta_shift) / grid.dtheta();
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9) {
      throw Error(ErrorCode::invalid_argument, "theta shift is not a multiple of the grid spacing");
    }
    shift = static_cast<std::size_t>(rounded) % nq;
  }
  if (iso.kind == IsometryKind::t_reflection) {
    if (metric.preset() == MetricPreset::tabulated || std::abs(metric.reflection_center()) > 1e-12) {
      throw Error(ErrorCode::invalid_argument,
                  "t reflection is not grid-compatible: the metric is not symmetric about t = 0");
    }
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const std::size_t ib = iso.kind == IsometryKind::t_reflection ? nt - 1 - i : i;
    for (std::size_t j = 0; j < nq; ++j) {
      const std::size_t jb = (j + shift) % nq;
      dev = std::max(dev, std::abs(a(i, j) - b(ib, jb)));
    }
  }
  return dev;
}

}  // namespace cyv
