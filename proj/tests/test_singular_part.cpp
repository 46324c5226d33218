#include <doctest.h>

#include <cmath>
#include <string>

#include "cyvortex/error.hpp"
#include "cyvortex/singular_part.hpp"

using namespace cyv;

TEST_CASE("cutoff step is a monotone C^3 switch") {
  CHECK(cutoff_step(0.3) == 1.0);
  CHECK(cutoff_step(0.5) == 1.0);
  CHECK(cutoff_step(1.0) == 0.0);
  CHECK(cutoff_step(0.75) == doctest::Approx(0.5).epsilon(1e-14));
  double prev = 1.0;
  for (int k = 0; k <= 200; ++k) {
    const double s = 0.5 + 0.5 * k / 200.0;
    const double v = cutoff_step(s);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  const double h = 1e-5;
  for (double s : {0.55, 0.62, 0.75, 0.9, 0.97}) {
    const double d1 = (cutoff_step(s + h) - cutoff_step(s - h)) / (2 * h);
    const double d2 = (cutoff_step_d1(s + h) - cutoff_step_d1(s - h)) / (2 * h);
    CHECK(cutoff_step_d1(s) == doctest::Approx(d1).epsilon(1e-7));
    CHECK(cutoff_step_d2(s) == doctest::Approx(d2).epsilon(1e-7));
  }
  // Derivatives vanish at both ends of the annulus.
  CHECK(std::abs(cutoff_step_d1(0.5 + 1e-9)) < 1e-20);
  CHECK(std::abs(cutoff_step_d2(1.0 - 1e-9)) < 1e-12);
}

TEST_CASE("coincident centers merge") {
  VortexSet vs;
  vs.add({1.0, 0.5}, 1);
  vs.add({1.0, 0.5 + two_pi}, 2);
  vs.add({-1.0, 0.5}, 1);
  CHECK(vs.vortices().size() == 2);
  CHECK(vs.total() == 4);
  CHECK_THROWS_AS(vs.add({0.0, 0.0}, 0), Error);
}

TEST_CASE("cutoff radius honours separation and boundary clearance") {
  VortexSet one({{StripPoint(0.0, 1.0), 1}});
  CHECK(cutoff_radius(one, 12.0, 0.05) == doctest::Approx(std::numbers::pi / 4));
  CHECK(cutoff_radius(one, 12.0, 0.05, 0.8) == doctest::Approx(0.8 * std::numbers::pi / 4));
  VortexSet pair({{StripPoint(0.0, 1.0), 1}, {StripPoint(1.2, 1.0), 1}});
  CHECK(cutoff_radius(pair, 12.0, 0.05) == doctest::Approx(0.3));

  VortexSet edge({{StripPoint(11.99, 1.0), 1}});
  try {
    cutoff_radius(edge, 12.0, 0.05);
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resolution);
    CHECK(std::string(e.what()).find("boundary clearance") != std::string::npos);
  }
  VortexSet outside({{StripPoint(13.0, 1.0), 1}});
  CHECK_THROWS_AS(cutoff_radius(outside, 12.0, 0.05), Error);
  CHECK_THROWS_AS(cutoff_radius(one, 12.0, 0.05, 1.5), Error);
}

TEST_CASE("ubar is the chart logarithm inside the core and vanishes outside") {
  const double eps = 0.6;
  SingularData sd(VortexSet({{StripPoint(0.0, 2.0), 2}}), eps);
  const StripPoint near{0.1, 2.2};
  const double rho = std::hypot(0.1, 0.2);
  CHECK(sd.ubar(near) == doctest::Approx(4.0 * std::log(rho / eps)).epsilon(1e-14));
  CHECK(sd.ubar({0.0, 2.0 + 0.61}) == 0.0);
  CHECK(std::isinf(sd.ubar({0.0, 2.0})));
  CHECK(sd.S({0.0, 2.0}) == 0.0);
  for (double t : {0.05, 0.2, 0.35, 0.5}) {
    const StripPoint p{t, 2.0 + 0.7 * t};
    CHECK(sd.ubar(p) <= 0.0);
    CHECK(sd.S(p) <= 1.0);
  }
}

TEST_CASE("closed-form derivatives of ubar match finite differences") {
  const double eps = 0.8;
  SingularData sd(VortexSet({{StripPoint(0.3, 1.0), 1}}), eps);
  const double h = 1e-4;
  for (double a : {0.0, 1.1, 2.5, 4.0}) {
    for (double r : {0.15, 0.45, 0.6, 0.72}) {
      const StripPoint p{0.3 + r * std::cos(a), 1.0 + r * std::sin(a)};
      const auto g = sd.grad_ubar(p);
      const double gt = (sd.ubar({p.t + h, p.theta}) - sd.ubar({p.t - h, p.theta})) / (2 * h);
      const double gq = (sd.ubar({p.t, p.theta + h}) - sd.ubar({p.t, p.theta - h})) / (2 * h);
      CHECK(g[0] == doctest::Approx(gt).epsilon(1e-6));
      CHECK(g[1] == doctest::Approx(gq).epsilon(1e-6));
      const double lap = (sd.ubar({p.t + h, p.theta}) + sd.ubar({p.t - h, p.theta}) + sd.ubar({p.t, p.theta + h}) +
                          sd.ubar({p.t, p.theta - h}) - 4 * sd.ubar(p)) /
                         (h * h);
      // The logarithm is harmonic inside the inner disc.
      const double expect = r < 0.5 * eps ? 0.0 : lap;
      CHECK(sd.chart_laplacian_ubar(p) == doctest::Approx(expect).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("annulus source carries the full vortex charge") {
  // Divergence theorem: the chart Laplacian of ubar over the annulus equals
  // the outer flux (0) minus the inner flux 2 m * 2pi, so it integrates to -4 pi m.
  const int m = 3;
  const double eps = 0.7;
  SingularData sd(VortexSet({{StripPoint(0.0, 3.0), m}}), eps);
  const int n = 4000;
  const double a = 0.5 * eps, b = eps, h = (b - a) / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double r = a + h * k;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * r * sd.chart_laplacian_ubar({r, 3.0});
  }
  const double integral = two_pi * sum * h / 3.0;
  CHECK(integral == doctest::Approx(-4.0 * std::numbers::pi * m).epsilon(1e-9));
}
