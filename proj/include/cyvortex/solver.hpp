/// @file solver.hpp
/// @brief Damped Newton solver for the split vortex equation
///   Lap_g u = S e^u (S e^u - 1) + h,   w = ubar + u,
/// with the energy functional as descent certificate and fallback.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cyvortex/geometry.hpp"
#include "cyvortex/grid.hpp"
#include "cyvortex/krylov.hpp"
#include "cyvortex/singular_part.hpp"

namespace cyv {

/// How the regular-part source h is sampled on the grid.
///  - lattice:  h = -lambda^{-1} (Lap_0^h ubar - D), where D places the vortex
///    charge 4 pi m on the four corners of the vortex cell. The discrete
///    equation for w then no longer references ubar, so w is exactly
///    independent of the cutoff radius.
///  - analytic: the closed-form h sampled at the nodes.
enum class SourceMode { lattice, analytic };

const char* to_string(SourceMode mode);

class Problem {
 public:
  /// Snaps centers to cell centers, merges coincident ones, checks the cutoff
  /// resolution and precomputes lambda, ubar, S and h on the nodes.
  static Problem build(const StripGrid& grid, const CylinderMetric& metric, const std::vector<Vortex>& vortices,
                       double epsilon_scale = 1.0, SourceMode mode = SourceMode::lattice);

  /// Copy of this problem with q added to the source.
  Problem with_extra_source(const GridField& q) const;

  const StripGrid& grid() const { return grid_; }
  const CylinderMetric& metric() const { return metric_; }
  const VortexSet& vortices() const { return vortices_; }
  int vortex_number() const { return vortices_.total(); }
  /// Zero when there are no vortices.
  double epsilon1() const { return epsilon1_; }
  double epsilon_scale() const { return epsilon_scale_; }
  SourceMode source_mode() const { return mode_; }
  const std::optional<SingularData>& singular() const { return singular_; }

  const GridField& lambda() const { return lambda_; }
  const GridField& ubar() const { return ubar_; }
  const GridField& S() const { return S_; }
  const GridField& source() const { return h_; }
  double source_inf() const { return h_inf_; }

  /// Grid indices (i, j) of the lower-left corner of every vortex cell.
  const std::vector<std::pair<std::size_t, std::size_t>>& vortex_cells() const { return cells_; }
  /// True when node (i, j) is a corner of a vortex-containing cell.
  bool in_vortex_cell(std::size_t i, std::size_t j) const;

 private:
  Problem(const StripGrid& g, const CylinderMetric& m) : grid_(g), metric_(m) {}

  StripGrid grid_;
  CylinderMetric metric_;
  VortexSet vortices_;
  double epsilon1_ = 0.0;
  double epsilon_scale_ = 1.0;
  SourceMode mode_ = SourceMode::lattice;
  std::optional<SingularData> singular_;
  GridField lambda_, ubar_, S_, h_;
  double h_inf_ = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> cells_;
};

struct SolverOptions {
  double tol_residual_inf = 1e-10;
  int max_newton = 60;
  int max_linesearch_halvings = 30;
  KrylovOptions krylov{};
  int fallback_descent_steps = 200;
  PreconditionerKind preconditioner = PreconditionerKind::modal;
  double u_cap = 50.0;
  /// Line relaxation of the far tails after convergence, for relative accuracy
  /// of w where it is far below the residual tolerance.
  bool tail_polish = true;
  int tail_polish_max_sweeps = 400;
};

/// Throws Error(invalid_argument) when an option is not positive.
void validate(const SolverOptions& options);

enum class SolveStatus { converged, max_iterations, krylov_breakdown, line_search_failed, diverged };

const char* to_string(SolveStatus status);

struct NewtonStep {
  int iteration = 0;
  double residual_inf = 0.0;
  double energy = 0.0;
  double step = 0.0;
  int krylov_iterations = 0;
  bool descent = false;  // true for a fallback steepest-descent step
};

struct FieldSolution {
  GridField u;
  GridField w;
  SolveStatus status = SolveStatus::max_iterations;
  double residual_inf = 0.0;
  /// Absolute convergence threshold tol * (1 + |h|_inf).
  double threshold = 0.0;
  int iterations = 0;
  /// Energy after every accepted step; entry 0 is the initial guess.
  std::vector<double> energy_trace;
  /// Round-off allowance for each consecutive pair of energy_trace.
  std::vector<double> energy_allowance;
  std::vector<NewtonStep> log;
  int tail_polish_sweeps = 0;
  std::string message;

  bool converged() const { return status == SolveStatus::converged; }
};

/// F(u) = Lap_g u - S e^u (S e^u - 1) - h on interior rows, 0 on Dirichlet rows.
/// Throws Error(diverged) if some u exceeds 700 or F is not finite.
GridField residual(const Problem& problem, const GridField& u);

/// J v = Lap_g v - S e^u (2 S e^u - 1) v.
GridField jacobian_apply(const Problem& problem, const GridField& u, const GridField& v);

/// E(u) = chart Dirichlet energy + integral of (S e^u - 1)^2 + 2 h u.
double energy(const Problem& problem, const GridField& u);

/// Sum of the magnitudes of the terms in energy(); scales its round-off.
double energy_magnitude(const Problem& problem, const GridField& u);

FieldSolution newton_solve(const Problem& problem, const SolverOptions& options,
                           const GridField* initial = nullptr);

/// Bilinear interpolation of a coarse field onto a finer grid with the same T.
GridField prolongate(const StripGrid& coarse, const GridField& f, const StripGrid& fine);

/// One line per step: iteration, residual_inf, energy, step, krylov iterations.
std::string convergence_log(const FieldSolution& solution);

}  // namespace cyv
