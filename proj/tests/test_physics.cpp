#include <doctest.h>

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "plab/errors.hpp"
#include "plab/physics.hpp"

using namespace plab;
using physics::CFState;
using physics::IDMParams;

TEST_CASE("desired gap") {
  const IDMParams p;
  CHECK(physics::idm_desired_gap({0.0, 7.0, 5.0}, p) == p.s0);
  CHECK(physics::idm_desired_gap({10.0, 10.0, 5.0}, p) == doctest::Approx(13.255).epsilon(1e-12));
  CHECK(physics::idm_desired_gap({10.0, 8.0, 5.0}, p) > physics::idm_desired_gap({10.0, 10.0, 5.0}, p));
}

TEST_CASE("IDM acceleration") {
  const IDMParams p;
  // Hand evaluation with s* = 13.255.
  const double expected = 0.572 * (1.0 - std::pow(10.0 / 23.058, 4.0) - std::pow(13.255 / 20.0, 2.0));
  CHECK(physics::idm_accel({10.0, 10.0, 20.0}, p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(physics::idm_accel({10.0, 10.0, 20.0}, p) == doctest::Approx(0.30052).epsilon(1e-4));
  CHECK(physics::idm_accel({0.0, 0.0, p.s0}, p) == 0.0);
  CHECK(std::abs(physics::idm_accel({p.v0, p.v0, 1e9}, p)) <= 1e-9);
  CHECK_THROWS_AS(physics::idm_accel({1.0, 1.0, 0.0}, p), StateError);
  // delta other than 4 takes the pow path.
  IDMParams q = p;
  q.delta = 3.0;
  CHECK(physics::idm_accel({10.0, 10.0, 1e9}, q) == doctest::Approx(0.572 * (1.0 - std::pow(10.0 / 23.058, 3.0))));
}

TEST_CASE("params validation") {
  IDMParams p;
  p.b = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgError);
  p = IDMParams{};
  p.v0 = INFINITY;
  CHECK_THROWS_AS(p.validate(), ArgError);
}

TEST_CASE("equilibrium gap matches a root-find of the acceleration") {
  const IDMParams p;
  for (double v : {0.0, 5.0, 12.0, 20.0}) {
    const auto f = [&](double s) { return physics::idm_accel({v, v, s}, p); };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::bisect(f, 0.5, 500.0, tol, iters);
    const double root = 0.5 * (lo + hi);
    CHECK(physics::equilibrium_gap(v, p) == doctest::Approx(root).epsilon(1e-9));
    CHECK(std::abs(physics::idm_accel({v, v, physics::equilibrium_gap(v, p)}, p)) <= 1e-12);
  }
  CHECK_THROWS_AS(physics::equilibrium_gap(p.v0, p), ArgError);
  CHECK_THROWS_AS(physics::equilibrium_gap(-1.0, p), ArgError);
}

namespace {

std::vector<physics::LeaderSample> constant_leader(double v, double dt, std::size_t n, double x0 = 0.0) {
  std::vector<physics::LeaderSample> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {i * dt, v, x0 + v * i * dt, 0.0};
  return out;
}

}  // namespace

TEST_CASE("follower stays at equilibrium behind a steady leader") {
  const IDMParams p;
  const double v = 15.0;
  const double s = physics::equilibrium_gap(v, p);
  const auto leader = constant_leader(v, 0.1, 1001);
  const auto f = physics::simulate_follower(leader, p, 0.1, {v, v, s});
  REQUIRE(f.size() == leader.size());
  for (const auto& x : f) CHECK(std::abs(x.v - v) <= 1e-3);
  CHECK(f.front().a == 0.0);
  CHECK(f.front().s == s);
}

TEST_CASE("empty leader and collisions") {
  const IDMParams p;
  CHECK(physics::simulate_follower({}, p, 0.1, {10.0, 10.0, 20.0}).empty());
  // A stopped leader just ahead of a fast follower.
  const auto leader = constant_leader(0.0, 0.1, 200);
  try {
    physics::simulate_follower(leader, p, 0.1, {30.0, 0.0, 3.0});
    FAIL("expected a collision");
  } catch (const CollisionError& e) {
    CHECK(e.step() > 0);
  }
}

TEST_CASE("Euler steps converge as dt halves") {
  const IDMParams p;
  auto run = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::llround(10.0 / dt)) + 1;
    std::vector<physics::LeaderSample> leader(n);
    double x = 30.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = i * dt;
      const double v = 15.0 + 3.0 * std::sin(0.3 * t);
      leader[i] = {t, v, x, 0.9 * std::cos(0.3 * t)};
      x += v * dt;
    }
    return physics::simulate_follower(leader, p, dt, {12.0, 15.0, 30.0});
  };
  const auto coarse = run(0.1);
  const auto fine = run(0.05);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK(std::abs(coarse[i].v - fine[2 * i].v) <= 1e-2);
  }
}

TEST_CASE("noise is seeded") {
  const IDMParams p;
  const auto leader = constant_leader(15.0, 0.1, 100, 40.0);
  const CFState init{15.0, 15.0, 40.0};
  const auto a = physics::simulate_follower(leader, p, 0.1, init, {0.1, 5});
  const auto b = physics::simulate_follower(leader, p, 0.1, init, {0.1, 5});
  const auto c = physics::simulate_follower(leader, p, 0.1, init, {0.1, 6});
  CHECK(a.back().v == b.back().v);
  CHECK(a.back().v != c.back().v);
}

namespace {

std::vector<physics::CalibrationSample> samples_from(const IDMParams& truth, std::size_t n) {
  std::vector<physics::CalibrationSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const CFState st{3.0 + 0.1 * i, 4.0 + 0.09 * i, 8.0 + 0.3 * i};
    out.push_back({st, physics::idm_accel(st, truth)});
  }
  return out;
}

}  // namespace

TEST_CASE("Monte-Carlo calibration") {
  const IDMParams truth;
  const auto data = samples_from(truth, 60);
  CHECK(physics::acceleration_mse(data, truth) <= 1e-20);

  const physics::CalibrationRanges ranges;
  const auto one = physics::calibrate_monte_carlo(data, ranges, 1, 4);
  CHECK(one.best_index == 0);
  CHECK(one.mse == doctest::Approx(physics::acceleration_mse(data, one.params)).epsilon(1e-12));

  const auto many = physics::calibrate_monte_carlo(data, ranges, 20000, 4);
  CHECK(many.mse <= one.mse);
  CHECK(many.mse <= 1e-2);
  // Prefix property: the first draw is the same whatever the sample count.
  CHECK(physics::calibrate_monte_carlo(data, ranges, 1, 4).params == one.params);
  CHECK(physics::calibrate_monte_carlo(data, ranges, 20000, 4).params == many.params);

  CHECK_THROWS_AS(physics::calibrate_monte_carlo({}, ranges, 10, 1), ArgError);
  physics::CalibrationRanges bad;
  bad.b = {2.0, 1.0};
  CHECK_THROWS_AS(physics::calibrate_monte_carlo(data, bad, 10, 1), ArgError);
}

TEST_CASE("parameter files") {
  const auto path = std::filesystem::temp_directory_path() / "plab_idm_test.txt";
  IDMParams p;
  p.a_max = 0.123456789012345;
  physics::write_params(path, p, 0.0477);
  const auto back = physics::read_params(path);
  CHECK(back.params == p);
  CHECK(back.mse == 0.0477);

  {
    std::ofstream f(path);
    f << "v0=1\nbogus\n";
  }
  try {
    physics::read_params(path);
    FAIL("expected a parse error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line() == 2);
  }
  {
    std::ofstream f(path);
    f << "v0=1\ncolour=3\n";
  }
  CHECK_THROWS_AS(physics::read_params(path), UnknownKeyError);
  std::filesystem::remove(path);
}
