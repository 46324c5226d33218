/// @file krylov.hpp
/// @brief Restarted GMRES and the preconditioners used by the Newton solver.
///
/// The linear systems are posed in chart form, A v = Lap_0 v - coeff * v on
/// interior rows, with v = 0 on the Dirichlet rows. A is symmetric but may be
/// indefinite where coeff < 0, so GMRES is used rather than CG.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cyvortex/grid.hpp"

namespace cyv {

using LinearOperator = std::function<void(const GridField& in, GridField& out)>;

enum class PreconditionerKind { modal, jacobi };

const char* to_string(PreconditionerKind kind);

/// Approximate inverse of A. apply() must leave Dirichlet rows at zero.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(const GridField& in, GridField& out) const = 0;
};

/// Exact inverse of Lap_0 - a(t) on interior rows, where a(t_i) is the
/// theta-mean of max(coeff, 0) on row i. Diagonalised by the real Fourier
/// basis in theta and solved by a tridiagonal sweep in t for each mode.
std::unique_ptr<Preconditioner> make_modal_preconditioner(const StripGrid& g, const GridField& coeff);

/// Diagonal scaling by -(2/dt^2 + 2/dtheta^2 + |coeff|).
std::unique_ptr<Preconditioner> make_jacobi_preconditioner(const StripGrid& g, const GridField& coeff);

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const StripGrid& g,
                                                    const GridField& coeff);

/// A v = Lap_0 v - coeff * v on interior rows, zero on Dirichlet rows.
void apply_chart_operator(const StripGrid& g, const GridField& coeff, const GridField& v, GridField& out);

struct KrylovOptions {
  double tol = 1e-8;        // relative to |b|
  int max_iter = 500;
  int restart = 60;
};

struct KrylovResult {
  bool converged = false;
  bool breakdown = false;
  int iterations = 0;
  double relative_residual = 1.0;
  std::string message;
};

/// Right-preconditioned restarted GMRES for A x = b; x holds the initial
/// guess on entry and the solution on exit.
KrylovResult gmres(const StripGrid& g, const LinearOperator& A, const Preconditioner& M, const GridField& b,
                   GridField& x, const KrylovOptions& options);

}  // namespace cyv
