#include "cyvortex/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cyvortex/error.hpp"
#include "cyvortex/fields.hpp"
#include "cyvortex/io.hpp"
#include "cyvortex/oracle.hpp"

namespace cyv {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::config:
    case ErrorCode::resolution:
    case ErrorCode::out_of_range:
    case ErrorCode::shape_mismatch:
    case ErrorCode::io:
      return 2;
    case ErrorCode::diverged:
    case ErrorCode::not_converged:
    case ErrorCode::krylov_breakdown:
      return 1;
  }
  return 1;
}

namespace {

constexpr double two_pi_v = 2.0 * std::numbers::pi;

// JSON has no infinities or NaNs; those are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json grid_json(const StripGrid& g) {
  return {{"T", g.T()}, {"n_t", g.n_t()}, {"n_theta", g.n_theta()}, {"dt", g.dt()}, {"dtheta", g.dtheta()}};
}

json metric_json(const CylinderMetric& m) {
  return {{"preset", to_string(m.preset())},
          {"alpha", m.alpha()},
          {"t_plus", m.end_threshold(End::plus)},
          {"t_minus", m.end_threshold(End::minus)},
          {"t_flat", m.t_flat()},
          {"warnings", m.warnings()}};
}

json decay_json(const DecayReport& r) {
  return {{"end", to_string(r.end)},
          {"quantity", to_string(r.quantity)},
          {"t1", r.t1},
          {"t2", r.t2},
          {"r1", r.r1},
          {"r2", r.r2},
          {"points", r.points},
          {"a_fit", number(r.a_fit)},
          {"b_fit", number(r.b_fit)},
          {"r_squared", number(r.r_squared)},
          {"a_envelope", number(r.a_envelope)},
          {"window_truncated", r.window_truncated},
          {"ok", r.ok},
          {"message", r.message}};
}

json trace_json(const FieldSolution& s) {
  json a = json::array();
  for (double e : s.energy_trace) a.push_back(number(e));
  return a;
}

Problem build_problem(const RunConfig& c, const CylinderMetric& metric, const std::vector<Vortex>& vortices, double T,
                      std::size_t n_t) {
  return Problem::build(StripGrid(T, n_t, c.n_theta), metric, vortices, c.epsilon_scale, c.source);
}

std::vector<DecayReport> all_fits(const Problem& pb, const FieldSolution& sol, const DecayOptions& opts) {
  std::vector<DecayReport> fits;
  for (End e : {End::minus, End::plus}) {
    for (DecayQuantity q : {DecayQuantity::w, DecayQuantity::grad_w}) fits.push_back(fit_decay(pb, sol, e, q, opts));
  }
  return fits;
}

bool energy_descends(const FieldSolution& s, double& worst) {
  worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t k = 0; k + 1 < s.energy_trace.size(); ++k) {
    const double rise = s.energy_trace[k + 1] - s.energy_trace[k];
    worst = std::max(worst, rise);
    if (rise > s.energy_allowance[k]) ok = false;
  }
  if (s.energy_trace.size() < 2) worst = 0.0;
  return ok;
}

// Solve output shared by solve, verify and decay.
struct SolveOutcome {
  Problem problem;
  FieldSolution solution;
  json summary;
};

SolveOutcome solve_and_summarize(const RunConfig& c, const char* command) {
  const CylinderMetric metric = build_metric(c);
  Problem pb = build_problem(c, metric, c.vortices, c.T, c.n_t);
  FieldSolution sol = newton_solve(pb, c.solver);
  const int N = pb.vortex_number();
  json s;
  s["command"] = command;
  s["status"] = to_string(sol.status);
  s["converged"] = sol.converged();
  s["iterations"] = sol.iterations;
  s["residual_inf"] = number(sol.residual_inf);
  s["threshold"] = sol.threshold;
  s["tail_polish_sweeps"] = sol.tail_polish_sweeps;
  s["vortex_number"] = N;
  s["epsilon1"] = pb.epsilon1();
  s["grid"] = grid_json(pb.grid());
  s["metric"] = metric_json(metric);
  json snapped = json::array();
  for (const auto& v : pb.vortices().vortices()) {
    snapped.push_back({{"t", v.center.t}, {"theta", v.center.theta}, {"multiplicity", v.multiplicity}});
  }
  s["vortices_snapped"] = snapped;
  json warnings = json::array();
  if (!pb.grid().aspect_warning().empty()) warnings.push_back(pb.grid().aspect_warning());
  for (const auto& w : metric.warnings()) warnings.push_back(w);
  s["warnings"] = warnings;
  s["energy_trace"] = trace_json(sol);
  s["message"] = sol.message;
  s["flux_expected"] = -c.sign * two_pi_v * N;
  if (sol.converged()) {
    UnitsLedger units;
    units.sign = c.sign;
    const PhysicalFields pf = reconstruct(pb, sol, units);
    s["flux"] = total_flux(pf, pb);
    s["energy"] = total_energy(pf, pb);
    json fits = json::array();
    if (N > 0) {
      for (const auto& f : all_fits(pb, sol, c.decay)) fits.push_back(decay_json(f));
    }
    s["decay"] = fits;
  }
  s["config"] = json::parse(resolved_config_json(c));
  return {std::move(pb), std::move(sol), std::move(s)};
}

void write_solution_artifacts(const RunConfig& c, const SolveOutcome& o) {
  const fs::path dir = c.out_dir;
  write_text(dir / "convergence.log", convergence_log(o.solution));
  json sidecar = grid_json(o.problem.grid());
  sidecar["format"] = "t,theta,value";
  sidecar["layout"] = "row-major, t outer";
  sidecar["files"] = json::array();
  if (c.dump_fields) {
    const StripGrid& g = o.problem.grid();
    write_text(dir / "w.csv", field_csv(g, o.solution.w));
    write_text(dir / "u.csv", field_csv(g, o.solution.u));
    write_text(dir / "ubar.csv", field_csv(g, o.problem.ubar()));
    sidecar["files"] = {"w.csv", "u.csv", "ubar.csv"};
  }
  write_text(dir / "fields.json", sidecar.dump(2) + "\n");
}

void mark(const RunConfig& c, bool failed, const std::string& message) {
  const fs::path marker = c.out_dir / "FAILED";
  if (failed) {
    write_text(marker, message + "\n");
  } else {
    std::error_code ec;
    fs::remove(marker, ec);
  }
}

template <class Body>
RunReport guarded(const char* command, Body body) {
  RunReport rep;
  rep.command = command;
  try {
    body(rep);
  } catch (const Error& e) {
    rep.exit_code = exit_code_for(e.code());
    rep.message = e.what();
  } catch (const std::exception& e) {
    rep.exit_code = 1;
    rep.message = e.what();
  }
  if (rep.summary_json.empty()) {
    json s = {{"command", command}, {"exit_code", rep.exit_code}, {"error", rep.message}};
    rep.summary_json = s.dump(2);
  }
  return rep;
}

struct Invariant {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

json invariants_json(const std::vector<Invariant>& list) {
  json a = json::array();
  for (const auto& inv : list) {
    a.push_back({{"name", inv.name},
                 {"pass", inv.pass},
                 {"value", number(inv.value)},
                 {"tolerance", inv.tolerance},
                 {"detail", inv.detail}});
  }
  return a;
}

}  // namespace

RunReport run_solve(const RunConfig& config) {
  return guarded("solve", [&](RunReport& rep) {
    SolveOutcome o = solve_and_summarize(config, "solve");
    const bool ok = o.solution.converged();
    rep.exit_code = ok ? 0 : 1;
    rep.message = ok ? "converged" : o.solution.message;
    o.summary["exit_code"] = rep.exit_code;
    rep.summary_json = o.summary.dump(2);
    write_solution_artifacts(config, o);
    write_text(config.out_dir / "summary.json", rep.summary_json + "\n");
    mark(config, !ok, rep.message);
  });
}

RunReport run_verify(const RunConfig& config) {
  return guarded("verify", [&](RunReport& rep) {
    SolveOutcome o = solve_and_summarize(config, "verify");
    const Problem& pb = o.problem;
    const FieldSolution& sol = o.solution;
    const StripGrid& g = pb.grid();
    const int N = pb.vortex_number();
    const double target = two_pi_v * N;
    std::vector<Invariant> inv;

    inv.push_back({"converged", sol.converged(), sol.residual_inf, sol.threshold, sol.message});
    double worst_rise = 0.0;
    const bool descends = energy_descends(sol, worst_rise);
    inv.push_back({"energy_descent", descends, worst_rise, 0.0, "largest energy increase between accepted steps"});

    if (sol.converged()) {
      UnitsLedger units;
      units.sign = config.sign;
      const PhysicalFields pf = reconstruct(pb, sol, units);
      const double flux = total_flux(pf, pb);
      const double energy = total_energy(pf, pb);
      const double denom = N > 0 ? target : 1.0;
      const double flux_err = std::abs(std::abs(flux) - target) / denom;
      const double energy_err = std::abs(energy - target) / denom;
      const double bogo = std::abs(energy - std::abs(flux)) / denom;
      inv.push_back({"flux_quantization", N > 0 ? flux_err < 0.01 : flux == 0.0, flux_err, 0.01,
                     "relative deviation of |flux| from 2 pi N"});
      inv.push_back({"energy_saturation", N > 0 ? energy_err < 0.02 : energy == 0.0, energy_err, 0.02,
                     "relative deviation of the energy from 2 pi N"});
      inv.push_back({"bogomolnyi", N > 0 ? bogo < 0.02 : bogo == 0.0, bogo, 0.02,
                     "relative gap between energy and |flux|"});
      const std::size_t bad = sign_ledger_violations(pf, units);
      inv.push_back({"sign_ledger", bad == 0, static_cast<double>(bad), 0.0, "nodes violating the pointwise signs"});

      std::vector<DecayReport> fits;
      if (N > 0) fits = all_fits(pb, sol, config.decay);
      std::vector<DecayReport> w_fits;
      for (const auto& f : fits) {
        if (f.quantity == DecayQuantity::w) w_fits.push_back(f);
      }
      const NegativityReport neg = check_negativity(pb, sol, w_fits);
      inv.push_back({"negativity", neg.ok, neg.w_max, 0.0, neg.message});
      for (const auto& f : fits) {
        const bool ok = f.ok && f.b_fit > 0.5 && f.r_squared > 0.99;
        std::string detail = f.message;
        if (detail.empty()) {
          std::ostringstream msg;
          msg << "b_fit = " << f.b_fit << ", r^2 = " << f.r_squared << " over r_e in [" << f.r1 << ", " << f.r2 << "]";
          detail = msg.str();
        }
        inv.push_back({std::string("decay_") + to_string(f.end) + "_" + to_string(f.quantity), ok, f.b_fit, 0.5, detail});
      }
      o.summary["flux"] = flux;
      o.summary["energy"] = energy;

      const CylinderMetric& metric = pb.metric();
      const bool symmetric_preset = metric.preset() != MetricPreset::tabulated;
      if (config.verify_symmetry && N > 0 && symmetric_preset) {
        Isometry shift{IsometryKind::theta_shift, g.dtheta() * static_cast<double>(g.n_theta() / 2)};
        Problem pb2 = build_problem(config, metric, transform_vortices(pb.vortices().vortices(), shift), config.T, config.n_t);
        FieldSolution s2 = newton_solve(pb2, config.solver);
        const double dev = s2.converged() ? symmetry_check(g, metric, sol.w, s2.w, shift) : INFINITY;
        inv.push_back({"symmetry_theta_shift", dev < 1e-8, dev, 1e-8, "theta shift by half a turn"});
        if (std::abs(metric.reflection_center()) < 1e-12) {
          Isometry refl{IsometryKind::t_reflection, 0.0};
          Problem pb3 = build_problem(config, metric, transform_vortices(pb.vortices().vortices(), refl), config.T, config.n_t);
          FieldSolution s3 = newton_solve(pb3, config.solver);
          const double dev3 = s3.converged() ? symmetry_check(g, metric, sol.w, s3.w, refl) : INFINITY;
          inv.push_back({"symmetry_t_reflection", dev3 < 1e-8, dev3, 1e-8, "reflection t -> -t"});
        }
      }
      if (config.verify_truncation && N > 0) {
        const auto k = static_cast<std::size_t>(std::llround(2.0 / g.dt()));
        Invariant t{"truncation", false, INFINITY, 1e-6, ""};
        if (k >= 1 && config.n_t > 2 * k + 9) {
          const double T2 = g.T() - static_cast<double>(k) * g.dt();
          try {
            Problem pb4 = build_problem(config, metric, config.vortices, T2, config.n_t - 2 * k);
            FieldSolution s4 = newton_solve(pb4, config.solver);
            if (s4.converged()) {
              double dev = 0.0;
              for (std::size_t i = 0; i < pb4.grid().n_t(); ++i) {
                for (std::size_t j = 0; j < g.n_theta(); ++j) dev = std::max(dev, std::abs(s4.w(i, j) - sol.w(i + k, j)));
              }
              t.value = dev;
              t.pass = dev < t.tolerance;
            }
            std::ostringstream msg;
            msg << "max |w| difference against a solve truncated at T = " << T2;
            t.detail = msg.str();
          } catch (const Error& e) {
            t.detail = e.what();
          }
        } else {
          t.detail = "grid too coarse for a truncated companion solve";
        }
        inv.push_back(t);
      }
    }

    bool all = true;
    std::string failing;
    for (const auto& i : inv) {
      if (!i.pass) {
        all = false;
        failing += (failing.empty() ? "" : ", ") + i.name;
      }
    }
    rep.exit_code = all ? 0 : 1;
    rep.message = all ? "all invariants pass" : "failed invariants: " + failing;
    o.summary["invariants"] = invariants_json(inv);
    o.summary["all_pass"] = all;
    o.summary["exit_code"] = rep.exit_code;
    o.summary["verdict"] = rep.message;
    rep.summary_json = o.summary.dump(2);
    write_text(config.out_dir / "report.json", rep.summary_json + "\n");
    mark(config, !all, rep.message);
  });
}

RunReport run_mms(const RunConfig& config) {
  return guarded("mms", [&](RunReport& rep) {
    if (config.mms_grids.size() < 3) throw Error(ErrorCode::config, "mms needs at least 3 grids");
    const CylinderMetric metric = build_metric(config);
    const ManufacturedCase mc = named_case(config.mms_case);
    const auto rows = convergence_study(mc, metric, config.T, config.mms_grids, config.solver);
    std::ostringstream csv;
    csv << "grid,T,max_error,order\n";
    char buf[160];
    bool converged = true, orders_ok = true, exact = true;
    json table = json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      std::snprintf(buf, sizeof buf, "%zux%zu,%.17g,%.17g,%.17g\n", r.n_t, r.n_theta, r.T, r.max_error, r.order);
      csv << buf;
      converged = converged && r.converged;
      exact = exact && r.max_error <= 1e-14;
      if (k > 0 && !(r.order >= 1.8 && r.order <= 2.2)) orders_ok = false;
      table.push_back({{"n_t", r.n_t},
                       {"n_theta", r.n_theta},
                       {"T", r.T},
                       {"spacing", r.spacing},
                       {"max_error", r.max_error},
                       {"order", number(r.order)},
                       {"iterations", r.iterations},
                       {"converged", r.converged}});
    }
    const bool ok = converged && (exact || orders_ok);
    rep.exit_code = ok ? 0 : 1;
    if (!converged) rep.message = "a manufactured solve did not converge";
    else if (exact) rep.message = "exact at every grid";
    else rep.message = orders_ok ? "observed orders within [1.8, 2.2]" : "observed order outside [1.8, 2.2]";
    json s = {{"command", "mms"},
              {"case", config.mms_case},
              {"rows", table},
              {"finest_max_error", rows.back().max_error},
              {"exit_code", rep.exit_code},
              {"verdict", rep.message},
              {"config", json::parse(resolved_config_json(config))}};
    rep.summary_json = s.dump(2);
    write_text(config.out_dir / "mms.csv", csv.str());
    write_text(config.out_dir / "summary.json", rep.summary_json + "\n");
    mark(config, !ok, rep.message);
  });
}

RunReport run_decay(const RunConfig& config) {
  return guarded("decay", [&](RunReport& rep) {
    SolveOutcome o = solve_and_summarize(config, "decay");
    bool ok = o.solution.converged();
    std::string why = ok ? "" : o.solution.message;
    json fits = json::array();
    if (ok) {
      if (o.problem.vortex_number() == 0) {
        ok = false;
        why = "no vortices: w vanishes identically and has no tail to fit";
      }
      for (const auto& f : (o.problem.vortex_number() > 0 ? all_fits(o.problem, o.solution, config.decay)
                                                          : std::vector<DecayReport>{})) {
        fits.push_back(decay_json(f));
        if (!(f.ok && f.b_fit > 0.5)) {
          ok = false;
          if (why.empty()) why = f.message.empty() ? "decay rate at or below 0.5" : f.message;
        }
      }
    }
    rep.exit_code = ok ? 0 : 1;
    rep.message = ok ? "exponential decay with b_fit > 0.5 on both ends" : why;
    json s = {{"command", "decay"},
              {"fits", fits},
              {"converged", o.solution.converged()},
              {"exit_code", rep.exit_code},
              {"verdict", rep.message},
              {"config", json::parse(resolved_config_json(config))}};
    rep.summary_json = s.dump(2);
    write_text(config.out_dir / "decay.json", rep.summary_json + "\n");
    mark(config, !ok, rep.message);
  });
}

RunReport run_command(const std::string& command, const RunConfig& config) {
  if (command == "solve") return run_solve(config);
  if (command == "verify") return run_verify(config);
  if (command == "mms") return run_mms(config);
  if (command == "decay") return run_decay(config);
  RunReport rep;
  rep.command = command;
  rep.exit_code = 2;
  rep.message = "unknown command '" + command + "'";
  rep.summary_json = json({{"command", command}, {"exit_code", 2}, {"error", rep.message}}).dump(2);
  return rep;
}

}  // namespace cyv
