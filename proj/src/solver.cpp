#include "cyvortex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "cyvortex/error.hpp"
#include "cyvortex/parallel.hpp"

namespace cyv {

const char* to_string(SourceMode mode) { return mode == SourceMode::lattice ? "lattice" : "analytic"; }

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::krylov_breakdown: return "krylov_breakdown";
    case SolveStatus::line_search_failed: return "line_search_failed";
    case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

Problem Problem::build(const StripGrid& grid, const CylinderMetric& metric, const std::vector<Vortex>& vortices,
                       double epsilon_scale, SourceMode mode) {
  if (!(epsilon_scale > 0.0) || epsilon_scale > 1.0) {
    throw Error(ErrorCode::invalid_argument, "epsilon scale must lie in (0, 1]");
  }
  Problem p(grid, metric);
  p.epsilon_scale_ = epsilon_scale;
  p.mode_ = mode;
  for (const auto& v : vortices) {
    if (v.multiplicity < 1) throw Error(ErrorCode::invalid_argument, "vortex multiplicity must be >= 1");
    if (!std::isfinite(v.center.t) || std::abs(v.center.t) >= grid.T()) {
      std::ostringstream msg;
      msg << "vortex at t = " << v.center.t << " lies outside the strip |t| < " << grid.T();
      throw Error(ErrorCode::resolution, msg.str());
    }
    p.vortices_.add(grid.snap_to_cell_center(v.center), v.multiplicity);
  }

  p.lambda_ = sample_conformal_factor(grid, metric);
  const std::size_t nt = grid.n_t(), nq = grid.n_theta();
  p.ubar_ = GridField(grid);
  p.S_ = GridField(grid, 1.0);
  p.h_ = GridField(grid);
  if (p.vortices_.empty()) return p;

  p.epsilon1_ = cutoff_radius(p.vortices_, grid.T(), grid.max_spacing(), epsilon_scale);
  p.singular_.emplace(p.vortices_, p.epsilon1_);
  const SingularData& sd = *p.singular_;
  p.ubar_ = sample(grid, [&](const StripPoint& q) { return sd.ubar(q); });
  for (std::size_t k = 0; k < p.S_.size(); ++k) p.S_.values()[k] = std::exp(p.ubar_.values()[k]);

  for (const auto& v : p.vortices_.vortices()) {
    const double fi = std::floor((v.center.t + grid.T()) / grid.dt());
    const double fj = std::floor(v.center.theta / grid.dtheta());
    const auto i = static_cast<std::size_t>(fi);
    const auto j = static_cast<std::size_t>(fj) % nq;
    p.cells_.emplace_back(i, j);
  }

  if (mode == SourceMode::analytic) {
    p.h_ = sample(grid, [&](const StripPoint& q) { return sd.source(q, metric); });
  } else {
    GridField lap = chart_laplacian(grid, p.ubar_);
    const double cell = grid.dt() * grid.dtheta();
    for (std::size_t k = 0; k < p.cells_.size(); ++k) {
      const auto [i, j] = p.cells_[k];
      const double charge = 4.0 * std::numbers::pi * p.vortices_.vortices()[k].multiplicity / (4.0 * cell);
      const std::size_t jr = (j + 1) % nq;
      lap(i, j) -= charge;
      lap(i + 1, j) -= charge;
      lap(i, jr) -= charge;
      lap(i + 1, jr) -= charge;
    }
    for (std::size_t i = 1; i + 1 < nt; ++i) {
      for (std::size_t j = 0; j < nq; ++j) p.h_(i, j) = -lap(i, j) / p.lambda_(i, j);
    }
  }
  p.h_inf_ = max_abs(p.h_);
  return p;
}

Problem Problem::with_extra_source(const GridField& q) const {
  require_shape(grid_, q, "extra source");
  Problem p = *this;
  for (std::size_t k = 0; k < q.size(); ++k) p.h_.values()[k] += q.values()[k];
  p.h_inf_ = max_abs(p.h_);
  return p;
}

bool Problem::in_vortex_cell(std::size_t i, std::size_t j) const {
  const std::size_t nq = grid_.n_theta();
  for (const auto& [ci, cj] : cells_) {
    if ((i == ci || i == ci + 1) && (j == cj || j == (cj + 1) % nq)) return true;
  }
  return false;
}

void validate(const SolverOptions& o) {
  if (!(o.tol_residual_inf > 0.0) || o.max_newton < 1 || o.max_linesearch_halvings < 1 || !(o.krylov.tol > 0.0) ||
      o.krylov.max_iter < 1 || o.krylov.restart < 1 || o.fallback_descent_steps < 1 || !(o.u_cap > 0.0) ||
      o.tail_polish_max_sweeps < 1) {
    throw Error(ErrorCode::invalid_argument, "solver options must all be positive");
  }
}

namespace {

constexpr double overflow_guard = 700.0;

void check_overflow(const GridField& u) {
  for (double v : u.values()) {
    if (!(v <= overflow_guard)) throw Error(ErrorCode::diverged, "e^u overflow: u exceeds 700 or is not finite");
  }
}

// f = e^w (e^w - 1) and its derivative c = e^w (2 e^w - 1).
inline double nonlinearity(double w) { return std::exp(w) * std::expm1(w); }
inline double nonlinearity_slope(double w) {
  const double e = std::exp(w);
  return e * (2.0 * e - 1.0);
}

// Chart-scaled residual lambda * F, written into out.
void chart_residual(const Problem& pb, const GridField& u, GridField& out) {
  const StripGrid& g = pb.grid();
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double it2 = 1.0 / (g.dt() * g.dt());
  const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
  if (!out.matches(g)) out = GridField(g);
  parallel_for(nt, [&](std::size_t i) {
    double* o = &out(i, 0);
    if (i == 0 || i + 1 == nt) {
      std::fill(o, o + nq, 0.0);
      return;
    }
    const double* up = &u(i + 1, 0);
    const double* mid = &u(i, 0);
    const double* dn = &u(i - 1, 0);
    const double* lam = &pb.lambda()(i, 0);
    const double* ub = &pb.ubar()(i, 0);
    const double* h = &pb.source()(i, 0);
    for (std::size_t j = 0; j < nq; ++j) {
      const std::size_t jl = j == 0 ? nq - 1 : j - 1;
      const std::size_t jr = j + 1 == nq ? 0 : j + 1;
      const double lap = (up[j] - 2.0 * mid[j] + dn[j]) * it2 + (mid[jr] - 2.0 * mid[j] + mid[jl]) * iq2;
      o[j] = lap - lam[j] * (nonlinearity(ub[j] + mid[j]) + h[j]);
    }
  });
}

GridField chart_coefficient(const Problem& pb, const GridField& u) {
  GridField c(pb.grid());
  for (std::size_t k = 0; k < c.size(); ++k) {
    c.values()[k] = pb.lambda().values()[k] * nonlinearity_slope(pb.ubar().values()[k] + u.values()[k]);
  }
  return c;
}

double max_value(const GridField& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f.values()) m = std::max(m, v);
  return m;
}

struct EnergyParts {
  double value = 0.0;
  double magnitude = 0.0;
};

EnergyParts energy_parts(const Problem& pb, const GridField& u) {
  const StripGrid& g = pb.grid();
  const std::size_t nq = g.n_theta();
  const double cell = g.dt() * g.dtheta();
  const double dirichlet = chart_dirichlet_energy(g, u);
  auto row_terms = [&](std::size_t i, bool absolute) {
    double s = 0.0;
    for (std::size_t j = 0; j < nq; ++j) {
      const double w = pb.ubar()(i, j) + u(i, j);
      const double em = std::expm1(w);
      const double pot = em * em;
      const double lin = 2.0 * pb.source()(i, j) * u(i, j);
      s += pb.lambda()(i, j) * (absolute ? pot + std::abs(lin) : pot + lin);
    }
    return s * trapezoid_weight(g, i) * cell;
  };
  EnergyParts e;
  e.value = dirichlet + parallel_row_sum(g.n_t(), [&](std::size_t i) { return row_terms(i, false); });
  e.magnitude = dirichlet + parallel_row_sum(g.n_t(), [&](std::size_t i) { return row_terms(i, true); });
  return e;
}

double energy_allowance(double magnitude_a, double magnitude_b) {
  return 256.0 * std::numeric_limits<double>::epsilon() * std::max(magnitude_a, magnitude_b);
}

// Line relaxation in t over the far tails, sweeping theta columns in order.
// Each column solve is one Newton step on the node equations with theta
// neighbours frozen, written for u itself so tiny tails keep relative accuracy.
int polish_tails(const Problem& pb, GridField& u, int max_sweeps) {
  const StripGrid& g = pb.grid();
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  const double it2 = 1.0 / (g.dt() * g.dt());
  const double iq2 = 1.0 / (g.dtheta() * g.dtheta());
  auto row_small = [&](std::size_t i) {
    for (std::size_t j = 0; j < nq; ++j) {
      if (!(std::abs(pb.ubar()(i, j) + u(i, j)) < 1e-3)) return false;
    }
    return true;
  };
  // Interior row ranges [lo, hi] adjacent to each Dirichlet row.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  {
    std::size_t hi = 1;
    while (hi + 1 < nt && row_small(hi)) ++hi;
    if (hi >= 3) ranges.emplace_back(1, hi - 1);
    std::size_t lo = nt - 2;
    while (lo > 0 && row_small(lo)) --lo;
    if (lo + 3 <= nt - 1 && (ranges.empty() || lo + 1 > ranges.back().second)) ranges.emplace_back(lo + 1, nt - 2);
  }
  if (ranges.empty()) return 0;

  std::vector<double> diag, rhs, cp;
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    double worst = 0.0;
    for (const auto& [lo, hi] : ranges) {
      const std::size_t n = hi - lo + 1;
      diag.assign(n, 0.0);
      rhs.assign(n, 0.0);
      cp.assign(n, 0.0);
      for (std::size_t j = 0; j < nq; ++j) {
        const std::size_t jl = j == 0 ? nq - 1 : j - 1;
        const std::size_t jr = j + 1 == nq ? 0 : j + 1;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t i = lo + k;
          const double lam = pb.lambda()(i, j);
          const double w = pb.ubar()(i, j) + u(i, j);
          const double c = nonlinearity_slope(w);
          diag[k] = -(2.0 * it2 + 2.0 * iq2 + lam * c);
          rhs[k] = lam * (nonlinearity(w) + pb.source()(i, j) - c * u(i, j)) - (u(i, jl) + u(i, jr)) * iq2;
        }
        rhs[0] -= u(lo - 1, j) * it2;
        rhs[n - 1] -= u(hi + 1, j) * it2;
        // Thomas algorithm with constant off-diagonal it2.
        double prev_c = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double pivot = diag[k] - (k == 0 ? 0.0 : it2 * prev_c);
          cp[k] = it2 / pivot;
          rhs[k] = (rhs[k] - (k == 0 ? 0.0 : it2 * rhs[k - 1])) / pivot;
          prev_c = cp[k];
        }
        for (std::size_t k = n - 1; k-- > 0;) rhs[k] -= cp[k] * rhs[k + 1];
        for (std::size_t k = 0; k < n; ++k) {
          double v = rhs[k];
          if (std::abs(v) < 1e-300) v = 0.0;
          double& old = u(lo + k, j);
          const double scale = std::max(std::abs(v), std::abs(old));
          if (scale > 0.0) worst = std::max(worst, std::abs(v - old) / scale);
          old = v;
        }
      }
    }
    if (worst < 1e-9) {
      ++sweeps;
      break;
    }
  }
  return sweeps;
}

}  // namespace

GridField residual(const Problem& problem, const GridField& u) {
  require_shape(problem.grid(), u, "u");
  check_overflow(u);
  GridField out;
  chart_residual(problem, u, out);
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] /= problem.lambda().values()[k];
  if (!out.all_finite()) throw Error(ErrorCode::diverged, "residual is not finite");
  return out;
}

GridField jacobian_apply(const Problem& problem, const GridField& u, const GridField& v) {
  require_shape(problem.grid(), u, "u");
  require_shape(problem.grid(), v, "v");
  check_overflow(u);
  GridField coeff = chart_coefficient(problem, u);
  GridField out;
  apply_chart_operator(problem.grid(), coeff, v, out);
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] /= problem.lambda().values()[k];
  return out;
}

double energy(const Problem& problem, const GridField& u) {
  require_shape(problem.grid(), u, "u");
  check_overflow(u);
  return energy_parts(problem, u).value;
}

double energy_magnitude(const Problem& problem, const GridField& u) {
  require_shape(problem.grid(), u, "u");
  check_overflow(u);
  return energy_parts(problem, u).magnitude;
}

namespace {

struct Iterate {
  GridField u;
  GridField R;  // chart residual lambda * F
  double rinf = 0.0;
  double merit = 0.0;
  EnergyParts E;
};

// Evaluates a trial point; false if it overflows or is not finite.
bool evaluate(const Problem& pb, const GridField& u, Iterate& it) {
  for (double v : u.values()) {
    if (!(v <= overflow_guard)) return false;
  }
  it.u = u;
  chart_residual(pb, u, it.R);
  if (!it.R.all_finite()) return false;
  double rinf = 0.0;
  for (std::size_t k = 0; k < it.R.size(); ++k) {
    rinf = std::max(rinf, std::abs(it.R.values()[k] / pb.lambda().values()[k]));
  }
  it.rinf = rinf;
  it.merit = dot(it.R, it.R);
  it.E = energy_parts(pb, u);
  return std::isfinite(it.E.value);
}

GridField add_scaled(const GridField& u, double a, const GridField& d) {
  GridField out = u;
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] += a * d.values()[k];
  return out;
}

}  // namespace

FieldSolution newton_solve(const Problem& problem, const SolverOptions& options, const GridField* initial) {
  validate(options);
  const StripGrid& g = problem.grid();
  const std::size_t nt = g.n_t(), nq = g.n_theta();
  FieldSolution sol;
  sol.threshold = options.tol_residual_inf * (1.0 + problem.source_inf());

  GridField u0(g);
  if (initial != nullptr) {
    require_shape(g, *initial, "initial guess");
    u0 = *initial;
    for (std::size_t j = 0; j < nq; ++j) u0(0, j) = u0(nt - 1, j) = 0.0;
  }

  Iterate cur;
  if (!evaluate(problem, u0, cur)) {
    sol.status = SolveStatus::diverged;
    sol.message = "initial guess overflows";
    sol.u = u0;
    return sol;
  }
  sol.energy_trace.push_back(cur.E.value);
  sol.log.push_back({0, cur.rinf, cur.E.value, 0.0, 0, false});

  auto record = [&](const Iterate& next, double step, int kits, bool descent) {
    sol.energy_allowance.push_back(energy_allowance(cur.E.magnitude, next.E.magnitude));
    sol.energy_trace.push_back(next.E.value);
    sol.log.push_back({sol.iterations, next.rinf, next.E.value, step, kits, descent});
    cur = next;
  };

  // Preconditioned steepest descent on E. Returns the number of accepted steps.
  auto descent_phase = [&]() {
    int accepted = 0;
    const double entry_merit = cur.merit;
    const double cell = g.dt() * g.dtheta();
    for (int s = 0; s < options.fallback_descent_steps; ++s) {
      if (sol.iterations >= options.max_newton + options.fallback_descent_steps) break;
      GridField coeff = chart_coefficient(problem, cur.u);
      auto M = make_preconditioner(options.preconditioner, g, coeff);
      GridField negR = cur.R;
      for (double& v : negR.values()) v = -v;
      GridField d;
      M->apply(negR, d);
      for (double& v : d.values()) v = -v;  // M is negative definite, so -M^{-1} R points downhill
      // slope of E along d: gradient of E is -2 R dt dtheta
      const double slope = -2.0 * cell * dot(cur.R, d);
      if (!(slope < 0.0)) break;
      double alpha = 1.0;
      bool ok = false;
      Iterate trial;
      for (int h = 0; h <= options.max_linesearch_halvings; ++h, alpha *= 0.5) {
        GridField ut = add_scaled(cur.u, alpha, d);
        if (max_value(ut) > options.u_cap) continue;
        if (!evaluate(problem, ut, trial)) continue;
        if (trial.E.value <= cur.E.value + 1e-4 * alpha * slope) {
          ok = true;
          break;
        }
      }
      if (!ok) break;
      ++sol.iterations;
      record(trial, alpha, 0, true);
      ++accepted;
      if (cur.rinf <= sol.threshold || cur.merit < 0.25 * entry_merit) break;
    }
    return accepted;
  };

  bool polished = false;
  bool krylov_retry_used = false;
  int newton_steps = 0;
  while (true) {
    if (cur.rinf <= sol.threshold) {
      if (options.tail_polish && !polished && problem.vortex_number() > 0) {
        polished = true;
        GridField up = cur.u;
        sol.tail_polish_sweeps = polish_tails(problem, up, options.tail_polish_max_sweeps);
        Iterate next;
        if (sol.tail_polish_sweeps > 0 && evaluate(problem, up, next)) {
          if (!(up == cur.u)) record(next, 0.0, 0, false);
        }
        continue;
      }
      sol.status = SolveStatus::converged;
      break;
    }
    if (newton_steps >= options.max_newton) {
      sol.status = SolveStatus::max_iterations;
      std::ostringstream msg;
      msg << "no convergence after " << newton_steps << " Newton steps; residual_inf = " << cur.rinf;
      sol.message = msg.str();
      break;
    }
    ++newton_steps;
    GridField coeff = chart_coefficient(problem, cur.u);
    auto M = make_preconditioner(options.preconditioner, g, coeff);
    LinearOperator A = [&](const GridField& in, GridField& out) { apply_chart_operator(g, coeff, in, out); };
    GridField rhs = cur.R;
    for (double& v : rhs.values()) v = -v;
    GridField delta(g);
    KrylovResult kres = gmres(g, A, *M, rhs, delta, options.krylov);

    bool use_descent = false;
    if (!kres.converged && (kres.breakdown || !(kres.relative_residual < 0.5))) {
      if (krylov_retry_used) {
        sol.status = SolveStatus::krylov_breakdown;
        sol.message = "Krylov solver failed after descent retry: " + kres.message;
        break;
      }
      krylov_retry_used = true;
      use_descent = true;
    }

    if (!use_descent) {
      double alpha = 1.0;
      bool ok = false;
      Iterate trial;
      for (int h = 0; h <= options.max_linesearch_halvings; ++h, alpha *= 0.5) {
        GridField ut = add_scaled(cur.u, alpha, delta);
        if (max_value(ut) > options.u_cap) continue;
        if (!evaluate(problem, ut, trial)) continue;
        const bool merit_ok = trial.merit <= (1.0 - 1e-4 * alpha) * cur.merit;
        const bool energy_ok = trial.E.value <= cur.E.value + energy_allowance(cur.E.magnitude, trial.E.magnitude);
        if (merit_ok && energy_ok) {
          ok = true;
          break;
        }
      }
      if (ok) {
        ++sol.iterations;
        record(trial, alpha, kres.iterations, false);
        continue;
      }
      use_descent = true;
    }

    if (descent_phase() == 0) {
      sol.status = SolveStatus::line_search_failed;
      std::ostringstream msg;
      msg << "line search and descent fallback both failed at residual_inf = " << cur.rinf;
      sol.message = msg.str();
      break;
    }
  }

  sol.u = cur.u;
  sol.residual_inf = cur.rinf;
  sol.w = GridField(g);
  for (std::size_t k = 0; k < sol.w.size(); ++k) sol.w.values()[k] = problem.ubar().values()[k] + sol.u.values()[k];
  return sol;
}

GridField prolongate(const StripGrid& coarse, const GridField& f, const StripGrid& fine) {
  require_shape(coarse, f, "coarse field");
  if (coarse.T() != fine.T()) throw Error(ErrorCode::shape_mismatch, "prolongation needs grids with the same T");
  GridField out(fine);
  const std::size_t nq = coarse.n_theta();
  for (std::size_t i = 0; i < fine.n_t(); ++i) {
    const double x = (fine.t(i) + coarse.T()) / coarse.dt();
    const auto ic = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(x))), coarse.n_t() - 2);
    const double a = x - static_cast<double>(ic);
    for (std::size_t j = 0; j < fine.n_theta(); ++j) {
      const double y = fine.theta(j) / coarse.dtheta();
      const auto jc = static_cast<std::size_t>(std::floor(y)) % nq;
      const double b = y - std::floor(y);
      const std::size_t jn = (jc + 1) % nq;
      out(i, j) = (1 - a) * ((1 - b) * f(ic, jc) + b * f(ic, jn)) + a * ((1 - b) * f(ic + 1, jc) + b * f(ic + 1, jn));
    }
  }
  return out;
}

std::string convergence_log(const FieldSolution& solution) {
  std::ostringstream out;
  char buf[256];
  for (const auto& s : solution.log) {
    std::snprintf(buf, sizeof buf, "iter=%d residual_inf=%.6e energy=%.17g step=%.6e krylov=%d%s\n", s.iteration,
                  s.residual_inf, s.energy, s.step, s.krylov_iterations, s.descent ? " descent" : "");
    out << buf;
  }
  return out.str();
}

}  // namespace cyv
