#include <catch_amalgamated.hpp>

#include <cmath>

#include "apkin/lemmas.hpp"

using namespace apkin;
using Catch::Approx;

TEST_CASE("full suite passes with default options", "[lemmas]") {
  const std::vector<LemmaCheck> checks = lemma_suite();
  REQUIRE(checks.size() == 6);
  for (const LemmaCheck& c : checks) {
    INFO(c.name << ": worst " << c.worst << " " << c.detail);
    CHECK(c.passed);
  }
  CHECK(all_passed(checks));
}

TEST_CASE("suite is reproducible for a fixed seed", "[lemmas]") {
  LemmaSuiteOptions o;
  o.trials = 10;
  const auto a = lemma_suite(o);
  const auto b = lemma_suite(o);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].worst == b[i].worst);
}

TEST_CASE("forward difference bound is attained by the alternating field", "[lemmas]") {
  const StaggeredGrid g(16, 1.0);
  Lcg64 rng(1);
  const LemmaCheck c = check_forward_difference_bound(g, rng, 20, 1e-13);
  CHECK(c.passed);
  CHECK(c.worst < 1.0);
  CHECK(c.detail.find("1.000000") != std::string::npos);
}

TEST_CASE("identity checks hold on other grids", "[lemmas]") {
  const StaggeredGrid g(20, 3.0);
  const VelocityGrid vg = build_velocity_grid(6, QuadratureRule::gauss_legendre);
  Lcg64 rng(77);
  CHECK(check_upwind_centered_form(g, vg, rng, 20, 1e-13).passed);
  CHECK(check_summation_by_parts(g, rng, 20, 1e-13).passed);
  CHECK(check_adjoint_upwind_estimate(g, vg, rng, 20, 1e-13).passed);
}

TEST_CASE("velocity Cauchy-Schwarz depends on the quadrature", "[lemmas]") {
  const StaggeredGrid g(8, 1.0);
  SECTION("passes on random data for 16 Gauss nodes") {
    const VelocityGrid vg = build_velocity_grid(16, QuadratureRule::gauss_legendre);
    Lcg64 rng(4);
    const LemmaCheck c = check_velocity_cauchy_schwarz(g, vg, rng, 100, 1e-13);
    CHECK(c.passed);
    CHECK(c.worst < 1.0);
  }
  SECTION("fails on the telegraph grid where <|v|> = 1") {
    // g = (-1, 1) gives <v g>^2 = 1 against (1/2)<|v| g^2> = 1/2
    const VelocityGrid vg = build_velocity_grid(2, QuadratureRule::two_point_telegraph);
    Lcg64 rng(4);
    const LemmaCheck c = check_velocity_cauchy_schwarz(g, vg, rng, 20, 1e-13);
    CHECK_FALSE(c.passed);
    CHECK(c.worst <= 2.0 + 1e-12);
    CHECK(c.detail.find("<|v|> = 1") != std::string::npos);
  }
}

TEST_CASE("test function norms match their closed forms", "[lemmas]") {
  const TestFunction s = TestFunction::sine(1.0);
  const double w = 2 * std::numbers::pi;
  CHECK(s.l2_norm_sq(0) == Approx(0.5));
  CHECK(s.l2_norm_sq(2) == Approx(0.5 * std::pow(w, 4)));
  CHECK(s.h1_norm_sq() == Approx(0.5 + 0.5 * w * w));
  CHECK(s.derivative(1, 0.0) == Approx(w));
  CHECK(s.derivative(3, 0.0) == Approx(-w * w * w));
  const TestFunction merged =
      TestFunction::trigonometric("merged", 1.0, 0.0, {{1, 1.0, 0.0}, {1, 0.5, 0.0}});
  CHECK(merged.l2_norm_sq(0) == Approx(0.5 * 2.25));
  CHECK_THROWS_AS(TestFunction::trigonometric("bad", 1.0, 0.0, {{0, 1.0, 0.0}}), InvalidArgument);
  CHECK(TestFunction::constant(2.0).l2_norm_sq(0) == Approx(4.0));
}

TEST_CASE("finite-difference bounds hold for smooth functions", "[lemmas]") {
  const AppendixReport r = verify_appendix_bounds(
      {TestFunction::sine(1.0), TestFunction::two_mode(1.0), TestFunction::sine(2.0)},
      {8, 16, 32, 64, 128, 256});
  CHECK_FALSE(r.refused);
  CHECK(r.all_passed());
  for (const BoundCheck& b : r.checks) {
    INFO(b.clause << " " << b.function << " n=" << b.points << " ratio " << b.ratio);
    CHECK(b.passed);
  }
}

TEST_CASE("centered derivative error ratio for sin tends to 320/576", "[lemmas]") {
  // (delta phi - phi'(x_{i+1/2})) ~ k^3 dx^2 / 24 cos, so the ratio to dx^4/320 ||phi'''||^2 is 320/576
  const AppendixReport r = verify_appendix_bounds({TestFunction::sine(1.0)}, {256});
  bool found = false;
  for (const BoundCheck& b : r.checks)
    if (b.clause == "centered-derivative-error") {
      found = true;
      CHECK(b.ratio == Approx(320.0 / 576.0).epsilon(1e-3));
    }
  CHECK(found);
}

TEST_CASE("non-smooth functions are refused", "[lemmas]") {
  const AppendixReport r =
      verify_appendix_bounds({TestFunction::sine(), TestFunction::periodized_ramp()}, {32});
  CHECK(r.refused);
  CHECK(r.checks.empty());
  CHECK_FALSE(r.all_passed());
  CHECK(r.reason.find("periodized ramp") != std::string::npos);
  const LemmaCheck c = summarize(r);
  CHECK_FALSE(c.passed);
  CHECK(c.detail.rfind("refused", 0) == 0);
  CHECK_THROWS_AS(TestFunction::periodized_ramp().l2_norm_sq(0), InvalidArgument);
}
