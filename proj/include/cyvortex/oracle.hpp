/// @file oracle.hpp
/// @brief Independent checks of the solver: manufactured solutions,
/// refinement studies and isometry comparisons.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cyvortex/solver.hpp"

namespace cyv {

/// A smooth field u* with closed-form chart Laplacian, and the vortices of
/// the base problem it is manufactured on.
struct ManufacturedCase {
  std::string name;
  std::function<double(const StripPoint&)> u_star;
  std::function<double(const StripPoint&)> chart_laplacian;
  std::vector<Vortex> vortices;
};

/// Fixed families: "zero", "gauss-cos", "sech-mode2", "vortex-gauss".
ManufacturedCase named_case(const std::string& name);
std::vector<std::string> case_names();

struct Manufactured {
  Problem problem;  // base problem with q added to its source
  GridField u_star;
  GridField q_extra;
};

/// q = Lap_g u* - S e^{u*} (S e^{u*} - 1) - h from the closed-form Laplacian.
/// Throws Error(invalid_argument) when u* does not vanish on the Dirichlet rows.
Manufactured manufacture(const Problem& base, const ManufacturedCase& c);

struct StudyRow {
  std::size_t n_t = 0;
  std::size_t n_theta = 0;
  double T = 0.0;
  double spacing = 0.0;  // sqrt(dt * dtheta)
  double max_error = 0.0;
  double order = 0.0;    // NaN on the first row and when both errors vanish
  int iterations = 0;
  bool converged = false;
};

/// Solves the manufactured problem on each grid (sorted coarse to fine) and
/// measures max |u - u*| over the nodes. Orders use the spacing ratio of
/// consecutive grids. Throws Error(invalid_argument) for fewer than 3 grids or
/// grids that do not refine monotonically.
std::vector<StudyRow> convergence_study(const ManufacturedCase& c, const CylinderMetric& metric, double T,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& grids,
                                        const SolverOptions& options);

enum class IsometryKind { identity, theta_shift, t_reflection };

struct Isometry {
  IsometryKind kind = IsometryKind::identity;
  double theta_shift = 0.0;
};

const char* to_string(IsometryKind kind);

/// Image of a vortex configuration under the isometry.
std::vector<Vortex> transform_vortices(const std::vector<Vortex>& vortices, const Isometry& iso);

/// max over nodes of |a - b o iso|, where b solves the transformed problem.
/// Throws Error(invalid_argument) if the isometry does not map nodes to nodes
/// or is not an isometry of the metric.
double symmetry_check(const StripGrid& grid, const CylinderMetric& metric, const GridField& a, const GridField& b,
                      const Isometry& iso);

}  // namespace cyv
