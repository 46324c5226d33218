/// @file fields.hpp
/// @brief Physical observables rebuilt from w, plus flux, energy and tail fits.
///
/// Units are frozen at e = v = 1 and kappa = 2, so |phi|^2 = e^w and the
/// self-dual equations reduce to the scalar equation for w.
#pragma once

#include <string>
#include <vector>

#include "cyvortex/solver.hpp"

namespace cyv {

struct UnitsLedger {
  double e = 1.0;
  double v = 1.0;
  double kappa = 2.0;
  int sign = +1;  // +1 upper branch, -1 lower branch
};

/// Throws Error(invalid_argument) unless kappa = 2 e^2 v^2 and sign = +-1.
void validate(const UnitsLedger& units);

struct PhysicalFields {
  GridField phi_sq;             // e^w
  GridField Ftilde12;           // sign (1/2) e^w (e^w - 1)
  GridField A0;                 // -sign (1/2) (e^w - 1)
  GridField kinetic;            // e^w |grad_0 w|^2 / (2 lambda)
  GridField electric;           // |A0|^2 e^w
  GridField potential_density;  // (1/4) e^w (e^w - 1)^2
  GridField T00;                // kinetic + electric + potential
};

/// Throws Error(not_converged) for a solution that did not converge.
PhysicalFields reconstruct(const Problem& problem, const FieldSolution& solution, const UnitsLedger& units = {});

/// Chart gradient of w. Near the centers a log reference with the same
/// singularity is differentiated in closed form and only the smooth remainder
/// by central differences; elsewhere w d ln(-w) is used, which keeps relative
/// accuracy in the exponentially decaying tails.
std::pair<GridField, GridField> grad_w(const Problem& problem, const FieldSolution& solution);

/// Integral of Ftilde12 over the strip with respect to dV_g.
double total_flux(const PhysicalFields& fields, const Problem& problem);
/// Integral of T00 over the strip with respect to dV_g.
double total_energy(const PhysicalFields& fields, const Problem& problem);

/// Nodes violating sign Ftilde12 <= 0, sign A0 >= 0 or T00 >= 0.
std::size_t sign_ledger_violations(const PhysicalFields& fields, const UnitsLedger& units);

enum class DecayQuantity { w, grad_w };
const char* to_string(DecayQuantity q);

struct DecayOptions {
  /// Rows with max_theta |q| below this are treated as underflowed.
  double floor = 10.0 * 2.220446049250313e-16;
  /// Largest |t| used by the fit is T - edge_margin.
  double edge_margin = 1.0;
  /// Explicit window [t1, t2] in |t| along the chosen end; auto when t2 <= t1.
  double t1 = 0.0;
  double t2 = 0.0;
};

struct DecayReport {
  End end = End::plus;
  DecayQuantity quantity = DecayQuantity::w;
  double t1 = 0.0, t2 = 0.0;  // window in t (signed)
  double r1 = 0.0, r2 = 0.0;  // window in end radius
  int points = 0;
  double a_fit = 0.0;
  double b_fit = 0.0;
  double r_squared = 0.0;
  /// Smallest a with max_theta |q| <= a e^{-b_fit r_e} on the whole window.
  double a_envelope = 0.0;
  /// The domain edge cut the window before the tail reached the floor, so
  /// the asymptotic regime is not resolved.
  bool window_truncated = false;
  bool ok = false;
  std::string message;
};

DecayReport fit_decay(const Problem& problem, const FieldSolution& solution, End end, DecayQuantity quantity,
                      const DecayOptions& options = {});

struct NegativityReport {
  bool ok = false;
  double w_max = 0.0;
  std::size_t positive_nodes = 0;
  /// Nodes outside vortex cells and inside the underflow frontier with w = 0.
  std::size_t zero_nodes_inside = 0;
  /// Rows beyond which |w| < 1e-280 on the whole row (per end).
  std::size_t frontier_minus = 0, frontier_plus = 0;
  /// Envelope bound at the frontier row of each end; must be negligible.
  double envelope_at_frontier_minus = 0.0, envelope_at_frontier_plus = 0.0;
  /// Nodes in a fit window where w lies below -a_envelope e^{-b r_e}.
  std::size_t bound_violations = 0;
  std::string message;
};

/// Checks w <= 0 everywhere, w < 0 outside vortex cells wherever w is
/// representable, and the two-sided tail bound on the given decay windows.
NegativityReport check_negativity(const Problem& problem, const FieldSolution& solution,
                                  const std::vector<DecayReport>& w_fits);

}  // namespace cyv
