#include <doctest.h>

#include <cmath>
#include <numbers>

#include "plab/errors.hpp"
#include "plab/gdharness.hpp"

using namespace plab;

namespace {

gd::Objective quadratic() {
  return {ScalarTarget("quad", [](double x) { return 0.5 * x * x; }, Interval(-2.0, 2.0), 2.0,
                       [](double x) { return x; }),
          0.0, 0.0};
}

}  // namespace

TEST_CASE("one exact step on x^2/2 with eta = 1") {
  gd::GDConfig c;
  c.x0 = 1.0;
  c.schedule = gd::ConstantStep{1.0};
  c.tol = 1e-12;
  c.max_iters = 5;
  const gd::GDTrace t = gd::run_gd(quadratic(), c);
  REQUIRE(t.iterations_to_tol);
  CHECK(*t.iterations_to_tol == 1);
  CHECK(t.iterates[0] == 1.0);
  CHECK(t.iterates[1] == 0.0);
  CHECK(t.iterates.size() == 6);
}

TEST_CASE("zero objective meets the tolerance on the first step") {
  const gd::Objective zero{
      ScalarTarget("zero", [](double) { return 0.0; }, Interval(-1.0, 1.0), 0.0, [](double) { return 0.0; }), 0.0,
      0.0};
  const gd::GDTrace t = gd::run_gd(zero, gd::GDConfig{});
  REQUIRE(t.iterations_to_tol);
  CHECK(*t.iterations_to_tol == 1);
}

TEST_CASE("iterates stay inside the interval") {
  gd::GDConfig c;
  c.x0 = 1.9;
  c.schedule = gd::ConstantStep{3.0};
  c.max_iters = 20;
  const gd::GDTrace t = gd::run_gd(quadratic(), c);
  for (double x : t.iterates) CHECK(std::abs(x) <= 2.0);
}

TEST_CASE("iterate_step criterion") {
  gd::GDConfig c;
  c.x0 = 1.0;
  c.schedule = gd::ConstantStep{0.5};
  c.stop_on = gd::StopCriterion::iterate_step;
  c.tol = 0.1;
  const gd::GDTrace t = gd::run_gd(quadratic(), c);
  // |x^{t+1} - x^t| = 0.5^t
  REQUIRE(t.iterations_to_tol);
  CHECK(*t.iterations_to_tol == 4);
}

TEST_CASE("non-finite gradient raises DivergedError") {
  const gd::Objective bad{ScalarTarget("bad", [](double x) { return x; }, Interval(-1.0, 1.0), 1.0,
                                       [](double) { return NAN; }),
                          -1.0, -1.0};
  CHECK_THROWS_AS(gd::run_gd(bad, gd::GDConfig{}), DivergedError);
}

TEST_CASE("config validation") {
  gd::GDConfig c;
  c.schedule = gd::ConstantStep{0.0};
  CHECK_THROWS_AS(c.validate(), ArgError);
  CHECK(gd::parse_stop_criterion("value_gap") == gd::StopCriterion::value_gap);
  CHECK_THROWS_AS(gd::parse_stop_criterion("gradient"), ArgError);
}

TEST_CASE("avg_gap") {
  gd::GDTrace t;
  t.values = {3.0, 3.0, 3.0};
  t.f_star = 3.0;
  t.horizon = 3;
  CHECK(gd::avg_gap(t) == 0.0);
  t.values = {1.0, 0.5};
  t.f_star = 0.0;
  t.horizon = 2;
  CHECK(gd::avg_gap(t) == 0.75);
  CHECK_THROWS_AS(gd::avg_gap(gd::GDTrace{}), ArgError);
}

TEST_CASE("bound formulas") {
  CHECK(gd::constant_step_bound(1.0, std::numbers::sqrt2, 0.1, 100) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(gd::constant_step_bound(0.0, 0.0, 0.3, 7) == 0.0);
  CHECK(std::abs(gd::constant_step_bound(1.0, std::numbers::sqrt2, 0.1, 1'000'000'000) - 0.1) <= 1e-6);
  CHECK_THROWS_AS(gd::constant_step_bound(1.0, 1.0, 0.0, 10), ArgError);
  CHECK(gd::diminishing_bound(1.0, 1.0, 100) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(gd::diminishing_bound(0.0, 0.0, 9) == 0.0);
  CHECK(gd::diminishing_bound(1.0, 1.0, 1'000'000) == doctest::Approx(1.5e-3).epsilon(1e-12));
  // Strictly increasing in L: r_demo's bound sits below f_demo's.
  CHECK(gd::constant_step_bound(1.0, 1.0, 0.1, 50) < gd::constant_step_bound(1.0, std::numbers::sqrt2, 0.1, 50));
  CHECK(gd::diminishing_bound(1.0, 1.0, 50) < gd::diminishing_bound(1.0, std::numbers::sqrt2, 50));
}

TEST_CASE("sqrt_sum_check") {
  CHECK(gd::sqrt_sum_check(1).sum == 1.0);
  CHECK(gd::sqrt_sum_check(1).bound == 2.0);
  CHECK(gd::sqrt_sum_check(4).sum == doctest::Approx(1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5));
  CHECK(gd::sqrt_sum_check(4).bound == 4.0);
  const gd::SqrtSum big = gd::sqrt_sum_check(1'000'000);
  CHECK(big.sum <= 2000.0);
}

TEST_CASE("convex suite stays under both bounds") {
  for (const gd::ConvexCase& cc : gd::convex_suite()) {
    for (double eta : {0.01, 0.1, 0.5}) {
      gd::GDConfig c;
      c.x0 = 1.0;
      c.schedule = gd::ConstantStep{eta};
      c.max_iters = 200;
      const gd::GDTrace t = gd::run_gd(cc.objective, c);
      CHECK(t.radius == 1.0);
      CHECK(gd::avg_gap(t) <= gd::constant_step_bound(t.radius, cc.lipschitz, eta, t.horizon));
    }
    gd::GDConfig c;
    c.x0 = -1.0;
    c.schedule = gd::DiminishingStep{};
    c.max_iters = 300;
    const gd::GDTrace t = gd::run_gd(cc.objective, c);
    CHECK(gd::avg_gap(t) <= gd::diminishing_bound(t.radius, cc.lipschitz, t.horizon));
  }
}

TEST_CASE("demo objectives and the residual's faster convergence") {
  const gd::Objective f = gd::demo_objective("f_demo");
  const gd::Objective r = gd::demo_objective("r_demo");
  CHECK(f.target(f.x_star) == doctest::Approx(f.f_star).epsilon(1e-12));
  CHECK(r.target(r.x_star) == doctest::Approx(r.f_star).epsilon(1e-12));
  gd::GDConfig cf;
  cf.schedule = gd::ConstantStep{1.0 / (10.0 * std::numbers::sqrt2)};
  gd::GDConfig cr;
  cr.schedule = gd::ConstantStep{0.1};
  const auto tf = gd::run_gd(f, cf);
  const auto tr = gd::run_gd(r, cr);
  REQUIRE(tf.iterations_to_tol);
  REQUIRE(tr.iterations_to_tol);
  CHECK(*tr.iterations_to_tol < *tf.iterations_to_tol);
}
