#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "oracles.hpp"

using namespace fieldnav;

namespace {

Configuration random_config(std::uint64_t& state, double span) {
  return {oracles::uniform(state, -span, span), oracles::uniform(state, -span, span),
          oracles::uniform(state, -kPi, kPi)};
}

// Forward-integrates a DubinsPath with the production replay and measures the
// endpoint miss.
void check_replay(const DubinsPath& path, double pos_tol = 1e-6, double ang_tol = 1e-6) {
  const Configuration reached = path.point_at(path.length());
  CAPTURE(to_string(path.word));
  CHECK(reached.distance_to(path.end) <= pos_tol);
  CHECK(std::fabs(wrap_to_pi(reached.theta - path.end.theta)) <= ang_tol);
}

}  // namespace

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  CHECK(wrap_to_pi(kPi) == doctest::Approx(kPi));
  CHECK(wrap_to_pi(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_to_pi(0.0) == doctest::Approx(0.0));
  CHECK(wrap_to_pi(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_to_pi(-2.5 * kPi) == doctest::Approx(-0.5 * kPi));
  std::uint64_t rng = 99;
  for (int i = 0; i < 200; ++i) {
    const double a = oracles::uniform(rng, -50.0, 50.0);
    const double w = wrap_to_pi(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::fabs(std::remainder(w - a, 2.0 * kPi)) < 1e-9);
  }
}

TEST_CASE("configuration validates and normalizes") {
  const Configuration q(1.0, 2.0, 5.0);
  CHECK(q.theta == doctest::Approx(wrap_to_pi(5.0)));
  CHECK_THROWS_AS(Configuration(std::nan(""), 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Configuration(0.0, std::numeric_limits<double>::infinity(), 0.0),
                  ValidationError);
}

TEST_CASE("dubins: identity pair gives a zero-length path") {
  const Configuration q(0.0, 0.0, 0.0);
  const DubinsPath p = dubins_shortest(q, q, 1.0);
  CHECK(p.length() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dubins: collinear aligned pair is a straight line, tie-broken to LSL") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {10, 0, 0}, 1.0);
  CHECK(p.word == DubinsWord::LSL);
  CHECK(p.length() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(p.seg_lengths[0] == doctest::Approx(0.0));
  CHECK(p.seg_lengths[2] == doctest::Approx(0.0));
  check_replay(p);
}

TEST_CASE("dubins: half circle collapses to a single left arc") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {0, 2, kPi}, 1.0);
  CHECK(p.word == DubinsWord::LSL);
  CHECK(p.length() == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(p.seg_lengths[1] == doctest::Approx(0.0));
  CHECK(p.seg_lengths[2] == doctest::Approx(0.0));
  check_replay(p);
}

TEST_CASE("dubins: invalid radius rejected") {
  CHECK_THROWS_AS(dubins_shortest({0, 0, 0}, {1, 0, 0}, 0.0), InvalidRadius);
  CHECK_THROWS_AS(dubins_shortest({0, 0, 0}, {1, 0, 0}, -0.5), InvalidRadius);
}

TEST_CASE("dubins: matches the independent oracle on random pairs") {
  std::uint64_t rng = 2024;
  for (int i = 0; i < 1000; ++i) {
    const Configuration a = random_config(rng, 5.0);
    const Configuration b = random_config(rng, 5.0);
    const double rho = oracles::uniform(rng, 0.2, 2.0);
    const DubinsPath p = dubins_shortest(a, b, rho);
    const double expect = oracles::dubins_length(a, b, rho);
    CAPTURE(i);
    CHECK(p.length() == doctest::Approx(expect).epsilon(0).scale(1).epsilon(1e-9));
    CHECK(std::fabs(p.length() - expect) <= 1e-6);
    check_replay(p);
    CHECK(p.length() >= a.distance_to(b) - 1e-9);  // Euclidean lower bound
  }
}

TEST_CASE("dubins distance is asymmetric for some pair") {
  const Configuration a(0.0, 0.0, 0.0);
  const Configuration b(0.5, 0.3, 2.0);
  const double ab = dubins_shortest(a, b, 1.0).length();
  const double ba = dubins_shortest(b, a, 1.0).length();
  CHECK(std::fabs(ab - ba) > 1e-6);
}

TEST_CASE("dubins length is invariant under rigid transforms") {
  std::uint64_t rng = 31;
  for (int i = 0; i < 100; ++i) {
    const Configuration a = random_config(rng, 5.0);
    const Configuration b = random_config(rng, 5.0);
    const double rho = oracles::uniform(rng, 0.3, 2.0);
    const double base = dubins_shortest(a, b, rho).length();

    const double tx = oracles::uniform(rng, -10.0, 10.0);
    const double ty = oracles::uniform(rng, -10.0, 10.0);
    const double ang = oracles::uniform(rng, -kPi, kPi);
    auto transform = [&](const Configuration& q) {
      return Configuration(tx + q.x * std::cos(ang) - q.y * std::sin(ang),
                           ty + q.x * std::sin(ang) + q.y * std::cos(ang), q.theta + ang);
    };
    const double moved = dubins_shortest(transform(a), transform(b), rho).length();
    CHECK(std::fabs(moved - base) <= 1e-9 * std::max(1.0, base));
  }
}

TEST_CASE("dubins length scales linearly with the instance") {
  std::uint64_t rng = 77;
  for (int i = 0; i < 100; ++i) {
    const Configuration a = random_config(rng, 5.0);
    const Configuration b = random_config(rng, 5.0);
    const double rho = oracles::uniform(rng, 0.3, 2.0);
    const double c = oracles::uniform(rng, 0.1, 10.0);
    const double base = dubins_shortest(a, b, rho).length();
    const double scaled =
        dubins_shortest({a.x * c, a.y * c, a.theta}, {b.x * c, b.y * c, b.theta}, rho * c)
            .length();
    CHECK(std::fabs(scaled - c * base) <= 1e-9 * std::max(1.0, c * base));
  }
}

TEST_CASE("sampling: straight 10 m path at 5 cm gives 201 samples") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {10, 0, 0}, 1.0);
  const ReferencePath ref = dubins_sample(p, 0.05);
  CHECK(ref.samples.size() == 201);
  CHECK(ref.total_length == doctest::Approx(10.0));
  for (const auto& s : ref.samples) CHECK(s.theta == doctest::Approx(0.0));
  CHECK(ref.cumulative_arclength.back() == doctest::Approx(ref.total_length));
}

TEST_CASE("sampling: half-circle endpoint is exact") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {0, 2, kPi}, 1.0);
  const ReferencePath ref = dubins_sample(p, 0.05);
  const Configuration& last = ref.samples.back();
  CHECK(last.distance_to({0, 2, kPi}) <= 1e-6);
  CHECK(std::fabs(wrap_to_pi(last.theta - kPi)) <= 1e-6);
}

TEST_CASE("sampling: gaps, curvature, and arclength properties on random paths") {
  std::uint64_t rng = 555;
  for (int i = 0; i < 50; ++i) {
    const Configuration a = random_config(rng, 4.0);
    const Configuration b = random_config(rng, 4.0);
    const double rho = oracles::uniform(rng, 0.5, 2.0);
    const DubinsPath p = dubins_shortest(a, b, rho);
    const double step = 0.05;
    const ReferencePath ref = dubins_sample(p, step);

    REQUIRE(ref.samples.size() >= 2);
    double polyline = 0.0;
    for (std::size_t k = 0; k + 1 < ref.samples.size(); ++k) {
      const double gap = ref.samples[k].distance_to(ref.samples[k + 1]);
      polyline += gap;
      CHECK(gap <= step + 1e-9);
      const double darc = ref.cumulative_arclength[k + 1] - ref.cumulative_arclength[k];
      CHECK(ref.cumulative_arclength[k + 1] > ref.cumulative_arclength[k]);
      const double dth = std::fabs(wrap_to_pi(ref.samples[k + 1].theta - ref.samples[k].theta));
      CHECK(dth / darc <= 1.0 / rho + 1e-6);
    }
    // Chord-sum accuracy holds when the step resolves the tightest arc.
    if (step <= rho / 10.0 + 1e-12) {
      CHECK(std::fabs(polyline - p.length()) <= 1e-3 * std::max(p.length(), 1e-9));
    }
  }
}

TEST_CASE("sampling: invalid step rejected") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {5, 0, 0}, 1.0);
  CHECK_THROWS_AS(dubins_sample(p, 0.0), InvalidStep);
  CHECK_THROWS_AS(dubins_sample(p, -0.1), InvalidStep);
}

TEST_CASE("path_at: endpoints, midpoint, and domain") {
  const DubinsPath p = dubins_shortest({0, 0, 0}, {10, 0, 0}, 1.0);
  const ReferencePath ref = dubins_sample(p, 0.05);
  CHECK(ref.at(0.0).distance_to(ref.samples.front()) == doctest::Approx(0.0));
  CHECK(ref.at(1.0).distance_to(ref.samples.back()) == doctest::Approx(0.0));
  const Configuration mid = ref.at(0.5);
  CHECK(mid.x == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(mid.y == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(ref.at(-0.01), OutOfDomain);
  CHECK_THROWS_AS(ref.at(1.01), OutOfDomain);
}

TEST_CASE("path_at: heading interpolates along the shortest arc") {
  // A segment whose sampled headings straddle the +/-pi seam.
  const DubinsPath p = dubins_shortest({0, 0, 3.0}, {-3, 1, -3.0}, 1.0);
  const ReferencePath ref = dubins_sample(p, 0.05);
  for (double s = 0.0; s <= 1.0; s += 0.01) {
    const Configuration q = ref.at(s);
    CHECK(q.theta > -kPi - 1e-12);
    CHECK(q.theta <= kPi + 1e-12);
  }
  // Continuity of interpolated pose across a knot.
  const Configuration lo = ref.at(0.4999999);
  const Configuration hi = ref.at(0.5000001);
  CHECK(lo.distance_to(hi) < 1e-4);
  CHECK(std::fabs(wrap_to_pi(hi.theta - lo.theta)) < 1e-4);
}

TEST_CASE("concatenate: collinear straights and closed tours") {
  const DubinsPath a = dubins_shortest({0, 0, 0}, {5, 0, 0}, 1.0);
  const DubinsPath b = dubins_shortest({5, 0, 0}, {10, 0, 0}, 1.0);
  const auto refs = concatenate({a, b}, 0.05);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].total_length + refs[1].total_length == doctest::Approx(10.0));

  // Closed 3-waypoint tour: the last segment ends where the first starts.
  const Configuration q0(0, 0, 0), q1(4, 0, 1.2), q2(2, 3, -2.0);
  const DubinsPath l0 = dubins_shortest(q0, q1, 1.0);
  const DubinsPath l1 = dubins_shortest(q1, q2, 1.0);
  const DubinsPath l2 = dubins_shortest(q2, q0, 1.0);
  const auto closed = concatenate({l0, l1, l2}, 0.05);
  REQUIRE(closed.size() == 3);
  CHECK(closed.back().samples.back().distance_to(closed.front().samples.front()) <= 1e-9);
}

TEST_CASE("concatenate: perturbed joint rejected") {
  const DubinsPath a = dubins_shortest({0, 0, 0}, {5, 0, 0}, 1.0);
  const DubinsPath b = dubins_shortest({5.001, 0, 0}, {10, 0, 0}, 1.0);
  CHECK_THROWS_AS(concatenate({a, b}, 0.05), DiscontinuousTour);
}
