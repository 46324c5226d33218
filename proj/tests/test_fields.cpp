#include <doctest.h>

#include <cmath>
#include <complex>

#include "cyvortex/error.hpp"
#include "cyvortex/fields.hpp"
#include "support.hpp"

using namespace cyv;

namespace {

CylinderMetric neck() { return CylinderMetric::make(MetricPreset::neck, {}); }

FieldSolution fake_solution(const StripGrid& g, double (*w)(double t, double theta)) {
  FieldSolution s;
  s.u = GridField(g);
  s.w = GridField(g);
  for (std::size_t i = 0; i < g.n_t(); ++i)
    for (std::size_t j = 0; j < g.n_theta(); ++j) s.w(i, j) = w(g.t(i), g.theta(j));
  s.u = s.w;
  s.status = SolveStatus::converged;
  return s;
}

struct VortexRun {
  StripGrid grid{6.0, 97, 48};
  Problem problem = Problem::build(grid, neck(), {{StripPoint(0.0, std::numbers::pi), 1}});
  FieldSolution solution = newton_solve(problem, {});
};

const VortexRun& vortex_run() {
  static const VortexRun run;
  return run;
}

}  // namespace

TEST_CASE("units ledger") {
  CHECK_NOTHROW(validate(UnitsLedger{}));
  CHECK_THROWS_AS(validate(UnitsLedger{1.0, 1.0, 3.0, 1}), Error);
  CHECK_THROWS_AS(validate(UnitsLedger{1.0, 1.0, 2.0, 0}), Error);
  CHECK_NOTHROW(validate(UnitsLedger{2.0, 0.5, 2.0, -1}));
}

TEST_CASE("substitution at w = -ln 2 and at the vacuum") {
  const StripGrid g(3.0, 33, 16);
  const Problem p = Problem::build(g, neck(), {});
  const FieldSolution s = fake_solution(g, [](double, double) { return -std::log(2.0); });
  for (int sign : {1, -1}) {
    const PhysicalFields f = reconstruct(p, s, UnitsLedger{1.0, 1.0, 2.0, sign});
    CHECK(f.phi_sq(4, 4) == doctest::Approx(0.5));
    CHECK(f.Ftilde12(4, 4) == doctest::Approx(-sign / 8.0));
    CHECK(f.A0(4, 4) == doctest::Approx(sign / 4.0));
    CHECK(f.potential_density(4, 4) == doctest::Approx(1.0 / 32.0));
    CHECK(f.electric(4, 4) == doctest::Approx(f.A0(4, 4) * f.A0(4, 4) * f.phi_sq(4, 4)));
    CHECK(f.kinetic(4, 4) == doctest::Approx(0.0).scale(1.0));
    CHECK(sign_ledger_violations(f, UnitsLedger{1.0, 1.0, 2.0, sign}) == 0);
  }
  const FieldSolution vac = fake_solution(g, [](double, double) { return 0.0; });
  const PhysicalFields f0 = reconstruct(p, vac);
  CHECK(max_abs(f0.Ftilde12) == 0.0);
  CHECK(max_abs(f0.A0) == 0.0);
  CHECK(max_abs(f0.T00) == 0.0);
  CHECK(total_flux(f0, p) == 0.0);
  CHECK(total_energy(f0, p) == 0.0);

  FieldSolution unconverged = vac;
  unconverged.status = SolveStatus::max_iterations;
  try {
    reconstruct(p, unconverged);
    FAIL("expected not_converged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_converged);
  }
}

TEST_CASE("kinetic density agrees with the gauge-explicit covariant derivative") {
  // On a core-free rectangle Theta = m atan2(theta - theta0, t - t0) is single
  // valued. With phi = e^{w/2} e^{i Theta} and e A_j = +d_j Theta - s eps_jk d_k ln|phi|
  // the phase cancels in D_j phi = d_j phi - i e A_j phi.
  const VortexRun& run = vortex_run();
  REQUIRE(run.solution.converged());
  const StripGrid& g = run.grid;
  const PhysicalFields f = reconstruct(run.problem, run.solution);
  const auto [wt, wq] = grad_w(run.problem, run.solution);
  const StripPoint c = run.problem.vortices().vortices().front().center;
  auto Theta = [&](double t, double q) { return std::atan2(q - c.theta, t - c.t); };
  const double h = 1e-6;
  const std::complex<double> I(0.0, 1.0);
  double worst = 0.0, worst_wrong_sign = 0.0;
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    const double t = g.t(i);
    if (t < 1.0 || t > 3.0) continue;
    for (std::size_t j = 0; j < g.n_theta(); ++j) {
      const double q = g.theta(j);
      if (q < 0.5 * std::numbers::pi || q > 1.5 * std::numbers::pi) continue;
      const double w = run.solution.w(i, j);
      const std::complex<double> phi = std::exp(0.5 * w) * std::exp(I * Theta(t, q));
      // Phase derivatives by differencing the closed-form phase.
      const double dTh_t = (Theta(t + h, q) - Theta(t - h, q)) / (2 * h);
      const double dTh_q = (Theta(t, q + h) - Theta(t, q - h)) / (2 * h);
      const std::complex<double> dphi_t = phi * (0.5 * wt(i, j) + I * dTh_t);
      const std::complex<double> dphi_q = phi * (0.5 * wq(i, j) + I * dTh_q);
      // eps_12 = +1: eA_t = dTheta_t - (1/2) d_theta w, eA_theta = dTheta_theta + (1/2) d_t w.
      auto kinetic_with = [&](double phase_sign) {
        const double At = phase_sign * dTh_t - 0.5 * wq(i, j);
        const double Aq = phase_sign * dTh_q + 0.5 * wt(i, j);
        const std::complex<double> Dt = dphi_t - I * At * phi;
        const std::complex<double> Dq = dphi_q - I * Aq * phi;
        return (std::norm(Dt) + std::norm(Dq)) / run.problem.lambda()(i, j);
      };
      const double ref = f.kinetic(i, j);
      if (ref < 1e-200) continue;
      worst = std::max(worst, std::abs(kinetic_with(1.0) - ref) / ref);
      worst_wrong_sign = std::max(worst_wrong_sign, std::abs(kinetic_with(-1.0) - ref) / ref);
    }
  }
  CHECK(worst < 1e-6);
  // With e A_j = -d_j Theta the phase does not cancel.
  CHECK(worst_wrong_sign > 1e-2);
}

TEST_CASE("single vortex: flux, energy and sign ledger") {
  const VortexRun& run = vortex_run();
  REQUIRE(run.solution.converged());
  const PhysicalFields f = reconstruct(run.problem, run.solution);
  const double flux = total_flux(f, run.problem);
  const double energy = total_energy(f, run.problem);
  CHECK(flux == doctest::Approx(-two_pi).epsilon(1e-8));
  CHECK(std::abs(energy - two_pi) / two_pi < 0.05);
  CHECK(sign_ledger_violations(f, {}) == 0);
  for (double v : f.phi_sq.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // Lower branch flips the flux and keeps the energy.
  const PhysicalFields fl = reconstruct(run.problem, run.solution, UnitsLedger{1.0, 1.0, 2.0, -1});
  CHECK(total_flux(fl, run.problem) == doctest::Approx(-flux));
  CHECK(total_energy(fl, run.problem) == doctest::Approx(energy));
}

TEST_CASE("decay fit recovers a synthetic exponential tail") {
  const StripGrid g(8.0, 321, 16);
  const Problem p = Problem::build(g, neck(), {});
  const FieldSolution s = fake_solution(g, [](double t, double q) {
    return -3.0 * std::exp(-0.9 * std::cosh(t)) * (1.0 + 0.2 * std::cos(q));
  });
  for (End end : {End::plus, End::minus}) {
    const DecayReport r = fit_decay(p, s, end, DecayQuantity::w);
    INFO(r.message);
    CHECK(r.ok);
    CHECK_FALSE(r.window_truncated);
    CHECK(r.b_fit == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(r.a_fit == doctest::Approx(3.6).epsilon(1e-8));
    CHECK(r.r_squared > 1.0 - 1e-12);
    CHECK(r.a_envelope >= r.a_fit * (1 - 1e-12));
    CHECK(std::abs(r.t1) == doctest::Approx(p.metric().end_threshold(end)).epsilon(0.05));
    const DecayReport rg = fit_decay(p, s, end, DecayQuantity::grad_w);
    CHECK(rg.ok);
    CHECK(std::abs(rg.b_fit - r.b_fit) < 0.15);
  }
  const NegativityReport n =
      check_negativity(p, s, {fit_decay(p, s, End::plus, DecayQuantity::w), fit_decay(p, s, End::minus, DecayQuantity::w)});
  CHECK(n.ok);
  CHECK(n.bound_violations == 0);
}

TEST_CASE("a short domain flags the decay window") {
  const StripGrid g(3.0, 121, 16);
  const Problem p = Problem::build(g, neck(), {});
  const FieldSolution s = fake_solution(g, [](double t, double) { return -std::exp(-std::cosh(t)); });
  const DecayReport r = fit_decay(p, s, End::plus, DecayQuantity::w);
  CHECK(r.window_truncated);
  CHECK_FALSE(r.ok);
  CHECK(r.message.find("window warning") != std::string::npos);
}

TEST_CASE("negativity flags positive nodes") {
  const StripGrid g(3.0, 33, 16);
  const Problem p = Problem::build(g, neck(), {});
  FieldSolution s = fake_solution(g, [](double t, double) { return -0.1 * std::exp(-t * t); });
  CHECK(check_negativity(p, s, {}).ok);
  s.w(10, 3) = 1e-9;
  const NegativityReport n = check_negativity(p, s, {});
  CHECK_FALSE(n.ok);
  CHECK(n.positive_nodes == 1);
  s.w(10, 3) = 0.0;
  CHECK(check_negativity(p, s, {}).zero_nodes_inside == 1);
}

TEST_CASE("negativity and decay on a converged vortex") {
  const VortexRun& run = vortex_run();
  std::vector<DecayReport> fits;
  DecayOptions opts;
  opts.edge_margin = 0.5;
  for (End end : {End::plus, End::minus}) fits.push_back(fit_decay(run.problem, run.solution, end, DecayQuantity::w, opts));
  const NegativityReport n = check_negativity(run.problem, run.solution, fits);
  INFO(n.message);
  CHECK(n.positive_nodes == 0);
  CHECK(n.zero_nodes_inside == 0);
  CHECK(n.bound_violations == 0);
  for (const auto& f : fits) CHECK(f.b_fit > 0.5);
}

TEST_CASE("flux depends only on the vortex number") {
  const StripGrid g(6.0, 97, 48);
  auto flux_of = [&](const std::vector<Vortex>& vs) {
    const Problem p = Problem::build(g, neck(), vs);
    const FieldSolution s = newton_solve(p, {});
    REQUIRE(s.converged());
    return total_flux(reconstruct(p, s), p);
  };
  const double triple = flux_of({{StripPoint(0.0, 2.0), 3}});
  const double separated = flux_of({{StripPoint(-1.5, 1.0), 1}, {StripPoint(0.0, 3.0), 1}, {StripPoint(1.5, 5.0), 1}});
  CHECK(std::abs(std::abs(triple) - 6 * std::numbers::pi) / (6 * std::numbers::pi) < 0.01);
  CHECK(std::abs(triple - separated) / std::abs(separated) < 0.01);
}
