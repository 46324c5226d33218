// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Grid "A x B" means A nodes in t (plus one, so the strip center is a node) by
// B nodes in theta; the manufactured-solution grids are used as given.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cyvortex/config.hpp"
#include "cyvortex/fields.hpp"
#include "cyvortex/oracle.hpp"
#include "cyvortex/parallel.hpp"
#include "cyvortex/pipeline.hpp"

using namespace cyv;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int passed = 0;
int evaluated = 0;

void report(int id, const char* name, bool ok, const std::string& detail, double secs) {
  ++evaluated;
  passed += ok;
  std::printf("[%s] %2d %-26s %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, name, detail.c_str(), secs);
  std::fflush(stdout);
}

CylinderMetric make_metric(MetricPreset p) {
  MetricParams params;
  params.mass = 1.0;
  return CylinderMetric::make(p, params);
}

CylinderMetric tabulated_neck(double T) {
  auto tab = std::make_shared<TabulatedSamples>();
  tab->t_min = -T;
  tab->dt = 0.05;
  tab->n_t = static_cast<std::size_t>(std::lround(2 * T / tab->dt)) + 1;
  tab->n_theta = 16;
  for (std::size_t i = 0; i < tab->n_t; ++i) {
    const double t = -T + tab->dt * static_cast<double>(i);
    for (std::size_t j = 0; j < tab->n_theta; ++j) tab->values.push_back(std::cosh(t) * std::cosh(t));
  }
  MetricParams params;
  params.table = tab;
  return CylinderMetric::make(MetricPreset::tabulated, params);
}

struct Run {
  std::string label;
  std::optional<Problem> problem;
  FieldSolution solution;
  double flux = 0.0;
  double energy = 0.0;
  double seconds = 0.0;
};

Run solve(const std::string& label, const StripGrid& g, const CylinderMetric& m, const std::vector<Vortex>& vs,
          double eps_scale = 1.0) {
  Run r;
  r.label = label;
  const auto t0 = Clock::now();
  r.problem.emplace(Problem::build(g, m, vs, eps_scale));
  r.solution = newton_solve(*r.problem, {});
  if (r.solution.converged()) {
    const PhysicalFields f = reconstruct(*r.problem, r.solution);
    r.flux = total_flux(f, *r.problem);
    r.energy = total_energy(f, *r.problem);
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::deque<Run> all_runs;  // every solve, for the energy-descent audit

const Run& keep(Run r) {
  all_runs.push_back(std::move(r));
  return all_runs.back();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  set_worker_count(1);
  const StripGrid fine(12.0, 513, 128);
  const StripGrid coarse(12.0, 257, 64);

  // 1. Vacuum exactness on every preset.
  {
    bool ok = true;
    double worst_time = 0.0, worst_res = 0.0;
    int worst_iter = 0;
    for (const CylinderMetric& m :
         {make_metric(MetricPreset::neck), make_metric(MetricPreset::wormhole), tabulated_neck(12.0)}) {
      const Run& r = keep(solve("vacuum", fine, m, {}));
      ok = ok && r.solution.converged() && r.solution.residual_inf < 1e-12 && r.solution.iterations <= 1 &&
           max_abs(r.solution.u) == 0.0 && r.flux == 0.0 && r.energy == 0.0 && r.seconds < 1.0;
      worst_time = std::max(worst_time, r.seconds);
      worst_res = std::max(worst_res, r.solution.residual_inf);
      worst_iter = std::max(worst_iter, r.solution.iterations);
    }
    report(1, "vacuum exactness", ok,
           fmt("3 presets: residual_inf %.1e (< 1e-12), newton steps %.0f (<= 1), u = flux = energy = 0, slowest "
               "%.2f s (< 1 s)",
               worst_res, worst_iter, worst_time),
           worst_time);
  }

  // 2. Manufactured solutions.
  {
    const auto t0 = Clock::now();
    bool orders_ok = true, error_ok = true, conv_ok = true;
    std::string detail;
    const CylinderMetric m = make_metric(MetricPreset::neck);
    for (const char* name : {"gauss-cos", "sech-mode2", "vortex-gauss"}) {
      const auto rows = convergence_study(named_case(name), m, 10.0, {{128, 64}, {256, 128}, {512, 256}}, {});
      for (std::size_t k = 0; k < rows.size(); ++k) {
        conv_ok = conv_ok && rows[k].converged;
        if (k > 0) orders_ok = orders_ok && rows[k].order >= 1.8 && rows[k].order <= 2.2;
      }
      error_ok = error_ok && rows.back().max_error < 1e-5;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s orders %.3f, %.3f finest err %.2e; ", name, rows[1].order, rows[2].order,
                    rows[2].max_error);
      detail += buf;
    }
    const double secs = seconds_since(t0);
    detail += std::string("orders in [1.8, 2.2] ") + (orders_ok ? "yes" : "NO") + ", finest err < 1e-5 " +
              (error_ok ? "yes" : "NO") + fmt(", %.0f s < 300 s", secs);
    report(2, "MMS convergence", conv_ok && orders_ok && error_ok && secs < 300.0, detail, secs);
  }

  // Shared runs for criteria 3, 4, 5.
  struct Config {
    const char* name;
    int N;
    std::vector<Vortex> vortices;
  };
  const std::vector<Config> configs = {
      {"N1", 1, {{StripPoint(0.3, pi), 1}}},
      {"N2", 2, {{StripPoint(-1.0, 1.0), 1}, {StripPoint(1.0, 4.0), 1}}},
      {"N3", 3, {{StripPoint(-1.5, 1.0), 1}, {StripPoint(0.0, 3.0), 1}, {StripPoint(1.5, 5.0), 1}}},
  };
  struct Pair {
    std::string label;
    int N;
    const Run* fine;
    const Run* coarse;
  };
  std::vector<Pair> pairs;
  double shared_secs = 0.0;
  for (MetricPreset preset : {MetricPreset::wormhole, MetricPreset::neck}) {
    const CylinderMetric m = make_metric(preset);
    for (const auto& c : configs) {
      const std::string label = std::string(to_string(preset)) + "/" + c.name;
      const Run& f = keep(solve(label, fine, m, c.vortices));
      const Run& g = keep(solve(label + "@coarse", coarse, m, c.vortices));
      shared_secs += f.seconds + g.seconds;
      pairs.push_back({label, c.N, &f, &g});
    }
  }

  // 3. Flux quantization and position independence.
  {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = 0.0;
    for (const auto& p : pairs) {
      const double target = 2 * pi * p.N;
      const double err = p.fine->solution.converged() ? std::abs(std::abs(p.fine->flux) - target) / target : INFINITY;
      worst = std::max(worst, err);
      ok = ok && err < 0.01;
    }
    const CylinderMetric neck = make_metric(MetricPreset::neck);
    const Run& alt = keep(solve("neck/N2-alt", fine, neck, {{StripPoint(0.0, 0.5), 1}, {StripPoint(2.0, 3.0), 1}}));
    const Run* n2 = nullptr;
    for (const auto& p : pairs)
      if (p.label == "neck/N2") n2 = p.fine;
    const double placement = std::abs(alt.flux - n2->flux) / std::abs(n2->flux);
    ok = ok && alt.solution.converged() && placement < 0.005;
    report(3, "flux quantization", ok,
           fmt("6 runs: max | |flux| - 2piN | / 2piN = %.2e (< 1e-2); N=2 placements differ by %.2e (< 5e-3)", worst,
               placement),
           shared_secs + seconds_since(t0));
  }

  // 4. Bogomolnyi saturation and its refinement.
  {
    bool ok = true;
    double worst = 0.0, worst_ratio = INFINITY;
    for (const auto& p : pairs) {
      const double target = 2 * pi * p.N;
      const double err = std::abs(p.fine->energy - target) / target;
      const double gap_f = std::abs(p.fine->energy - std::abs(p.fine->flux));
      const double gap_c = std::abs(p.coarse->energy - std::abs(p.coarse->flux));
      const double ratio = gap_c / gap_f;
      worst = std::max(worst, err);
      worst_ratio = std::min(worst_ratio, ratio);
      ok = ok && p.fine->solution.converged() && p.coarse->solution.converged() && err < 0.02 && ratio >= 3.0;
    }
    report(4, "Bogomolnyi saturation", ok,
           fmt("6 runs: max |E - 2piN| / 2piN = %.2e (< 2e-2); min |E - |flux|| reduction 256x64 -> 512x128 = %.2f "
               "(>= 3)",
               worst, worst_ratio),
           shared_secs);
  }

  // 6 first: its run also feeds the negativity audit.
  const auto t6 = Clock::now();
  const StripGrid decay_grid(14.0, 769, 128);
  const Run& tail = keep(solve("neck/T14", decay_grid, make_metric(MetricPreset::neck), {{StripPoint(0.0, pi), 1}}));
  std::vector<DecayReport> tail_fits;
  for (End end : {End::plus, End::minus})
    for (DecayQuantity q : {DecayQuantity::w, DecayQuantity::grad_w})
      tail_fits.push_back(fit_decay(*tail.problem, tail.solution, end, q));
  const double decay_secs = seconds_since(t6);

  // 5. Negativity with the fitted two-sided bound.
  {
    const auto t0 = Clock::now();
    bool ok = true;
    std::size_t positive = 0, zeros = 0, violations = 0, checked = 0;
    std::string failing;
    auto audit = [&](const Run& r, const std::vector<DecayReport>& fits) {
      const NegativityReport n = check_negativity(*r.problem, r.solution, fits);
      positive += n.positive_nodes;
      zeros += n.zero_nodes_inside;
      violations += n.bound_violations;
      ++checked;
      if (!n.ok || !r.solution.converged()) {
        ok = false;
        failing += " " + r.label + ": " + n.message;
      }
    };
    for (const auto& p : pairs) {
      std::vector<DecayReport> fits;
      for (End end : {End::plus, End::minus})
        fits.push_back(fit_decay(*p.fine->problem, p.fine->solution, end, DecayQuantity::w));
      audit(*p.fine, fits);
    }
    audit(tail, {tail_fits[0], tail_fits[2]});
    report(5, "negativity", ok,
           fmt("%.0f solves: nodes with w > 0: %.0f, w = 0 outside vortex cells: %.0f, below -a e^{-b r_e}: %.0f",
               static_cast<double>(checked), static_cast<double>(positive), static_cast<double>(zeros),
               static_cast<double>(violations)) +
               failing,
           seconds_since(t0));
  }

  // 6. Decay rates.
  {
    bool ok = tail.solution.converged() && decay_secs < 600.0;
    std::string detail;
    for (const auto& f : tail_fits) {
      ok = ok && f.ok && f.b_fit >= 0.8 && f.b_fit <= 1.1 && f.r_squared > 0.99 && f.b_fit > 0.5;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s/%s b=%.3f r2=%.4f; ", to_string(f.end), to_string(f.quantity), f.b_fit,
                    f.r_squared);
      detail += buf;
    }
    detail += "b in [0.8, 1.1], r2 > 0.99";
    report(6, "decay rates", ok, detail, decay_secs);
  }

  // 7. Splitting invariance.
  {
    const auto t0 = Clock::now();
    const CylinderMetric m = make_metric(MetricPreset::neck);
    const std::vector<Vortex> vs{{StripPoint(0.3, pi), 1}};
    const Run& a = keep(solve("neck/eps1", fine, m, vs, 1.0));
    const Run& b = keep(solve("neck/eps0.8", fine, m, vs, 0.8));
    double dw = 0.0, dubar = 0.0;
    for (std::size_t k = 0; k < a.solution.w.size(); ++k) {
      dw = std::max(dw, std::abs(a.solution.w.values()[k] - b.solution.w.values()[k]));
      dubar = std::max(dubar, std::abs(a.problem->ubar().values()[k] - b.problem->ubar().values()[k]));
    }
    const bool ok = a.solution.converged() && b.solution.converged() && dw < 1e-6 && dubar > 0.1;
    report(7, "splitting invariance", ok,
           fmt("eps1 vs 0.8 eps1: max |dw| = %.2e (< 1e-6), max |d ubar| = %.2f (O(1))", dw, dubar),
           seconds_since(t0));
  }

  // 8. Isometry equivariance.
  {
    const auto t0 = Clock::now();
    const CylinderMetric m = make_metric(MetricPreset::neck);
    const std::vector<Vortex> vs{{StripPoint(0.8, 1.0), 1}};
    const Run& a = keep(solve("neck/iso", fine, m, vs));
    const Isometry shift{IsometryKind::theta_shift, 32 * fine.dtheta()};
    const Isometry refl{IsometryKind::t_reflection, 0.0};
    const Run& b = keep(solve("neck/iso-shift", fine, m, transform_vortices(vs, shift)));
    const Run& c = keep(solve("neck/iso-reflect", fine, m, transform_vortices(vs, refl)));
    const double d_shift = symmetry_check(fine, m, a.solution.w, b.solution.w, shift);
    const double d_refl = symmetry_check(fine, m, a.solution.w, c.solution.w, refl);
    const bool ok = a.solution.converged() && b.solution.converged() && c.solution.converged() && d_shift < 1e-8 &&
                    d_refl < 1e-8;
    report(8, "isometry equivariance", ok,
           fmt("theta shift pi/2: %.2e, t reflection: %.2e (both < 1e-8)", d_shift, d_refl), seconds_since(t0));
  }

  // 9. Energy descent over every solve above.
  {
    bool ok = true;
    std::size_t steps = 0;
    double worst_rise = 0.0;
    for (const auto& r : all_runs) {
      ok = ok && r.solution.converged();
      const auto& e = r.solution.energy_trace;
      for (std::size_t k = 1; k < e.size(); ++k) {
        ++steps;
        worst_rise = std::max(worst_rise, e[k] - e[k - 1]);
        if (e[k] > e[k - 1] + r.solution.energy_allowance[k - 1]) ok = false;
      }
    }
    report(9, "energy descent", ok,
           fmt("%.0f converged solves, %.0f accepted steps, largest rise %.2e (round-off allowance only)",
               static_cast<double>(all_runs.size()), static_cast<double>(steps), worst_rise),
           0.0);
  }

  // 10. Determinism across worker counts.
  {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "cyvortex_acceptance";
    fs::remove_all(root);
    RunConfig c = parse_config(R"({"vortices": [{"t": -1, "theta": 1}, {"t": 1, "theta": 4}]})");
    std::vector<std::string> outputs;
    bool ok = true;
    for (int workers : {1, 4, 8}) {
      set_worker_count(workers);
      // Same out_dir each time: the resolved config, including the path, is part of the summary.
      fs::remove_all(root);
      c.out_dir = root;
      const RunReport rep = run_solve(c);
      ok = ok && rep.exit_code == 0;
      std::string bytes;
      for (const char* f : {"summary.json", "w.csv", "u.csv", "ubar.csv", "convergence.log", "fields.json"})
        bytes += slurp(c.out_dir / f) + '\x1f';
      outputs.push_back(bytes);
    }
    set_worker_count(1);
    ok = ok && outputs[0] == outputs[1] && outputs[0] == outputs[2] && outputs[0].size() > 1000;
    report(10, "determinism", ok,
           std::string("summary, dumps and log bit-identical for workers 1, 4, 8: ") + (ok ? "yes" : "NO"),
           seconds_since(t0));
  }

  std::printf("acceptance: %d/%d passed\n", passed, evaluated);
  std::printf("criteria evaluated: %d\n", evaluated);
  return passed == evaluated ? 0 : 1;
}
