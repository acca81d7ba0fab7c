#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fieldnav/errors.hpp"
#include "fieldnav/vehicle.hpp"
#include "oracles.hpp"

using namespace fieldnav;

TEST_CASE("dynamics of the differential drive") {
  const auto d1 = dynamics({0, 0, 0}, {1.0, 0.0});
  CHECK(d1[0] == doctest::Approx(1.0));
  CHECK(d1[1] == doctest::Approx(0.0));
  CHECK(d1[2] == doctest::Approx(0.0));

  const auto d2 = dynamics({0, 0, kPi / 2}, {1.0, 0.0});
  CHECK(d2[0] == doctest::Approx(0.0));
  CHECK(d2[1] == doctest::Approx(1.0));

  const auto d3 = dynamics({0, 0, 0}, {0.0, 1.0});
  CHECK(d3[0] == doctest::Approx(0.0));
  CHECK(d3[1] == doctest::Approx(0.0));
  CHECK(d3[2] == doctest::Approx(1.0));
}

TEST_CASE("rk4: straight motion is integrated exactly") {
  const Configuration next = rk4_step({0, 0, 0}, {0.5, 0.0}, 0.1);
  CHECK(next.x == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(next.y == 0.0);
  CHECK(next.theta == 0.0);
}

TEST_CASE("rk4: zero input is a fixed point") {
  const Configuration q(1.0, -2.0, 0.7);
  const Configuration next = rk4_step(q, {0.0, 0.0}, 0.1);
  CHECK(next.x == q.x);
  CHECK(next.y == q.y);
  CHECK(next.theta == doctest::Approx(q.theta));
}

TEST_CASE("rk4: matches the analytic constant-twist arc") {
  const Configuration q(0, 0, 0);
  const Configuration got = rk4_step(q, {0.5, 1.9}, 0.1);
  const Configuration expect = oracles::unicycle_arc(q, 0.5, 1.9, 0.1);
  CHECK(std::fabs(got.x - expect.x) <= 1e-6);
  CHECK(std::fabs(got.y - expect.y) <= 1e-6);
  CHECK(std::fabs(wrap_to_pi(got.theta - expect.theta)) <= 1e-6);

  std::uint64_t rng = 4242;
  for (int i = 0; i < 1000; ++i) {
    const Configuration state(oracles::uniform(rng, -5, 5), oracles::uniform(rng, -5, 5),
                              oracles::uniform(rng, -kPi, kPi));
    const double v = oracles::uniform(rng, 0.0, 0.5);
    const double w = oracles::uniform(rng, -1.9, 1.9);
    const Configuration a = rk4_step(state, {v, w}, 0.1);
    const Configuration b = oracles::unicycle_arc(state, v, w, 0.1);
    CHECK(std::fabs(a.x - b.x) <= 1e-6);
    CHECK(std::fabs(a.y - b.y) <= 1e-6);
    CHECK(std::fabs(wrap_to_pi(a.theta - b.theta)) <= 1e-6);
  }
}

TEST_CASE("rk4: heading stays normalized") {
  Configuration q(0, 0, 3.1);
  for (int i = 0; i < 100; ++i) {
    q = rk4_step(q, {0.2, 1.9}, 0.1);
    CHECK(q.theta > -kPi);
    CHECK(q.theta <= kPi);
  }
}

TEST_CASE("robot limits validate") {
  RobotLimits lim;
  CHECK_NOTHROW(lim.validate());
  lim.v_max = 0.0;
  CHECK_THROWS_AS(lim.validate(), SolverConfigError);

  const RobotLimits derived = RobotLimits::with_rate_divisor(0.5, 1.9, 5.0);
  CHECK(derived.dv_max == doctest::Approx(0.1));
  CHECK(derived.domega_max == doctest::Approx(0.38));
  CHECK_THROWS_AS(RobotLimits::with_rate_divisor(0.5, 1.9, 0.5), SolverConfigError);
}
