#include <doctest.h>

#include "polarset/evans.hpp"

#include <cmath>

using namespace polarset;

namespace {

FSigmaSpec two_points() {
  return FSigmaSpec::from_pieces({SetSpec(FinitePoints{{point1(0), point1(1)}})}, "two points");
}

}  // namespace

TEST_CASE("a single point gets a Dirac") {
  const auto k = KernelSpec::metric_power(1.0);
  EvansOptions opts;
  opts.depth = 3;
  const auto r = evans_measure(k, FSigmaSpec::from_pieces({SetSpec(FinitePoints{{point1(0.5)}})}), opts);
  REQUIRE(r.measure.size() == 1);
  CHECK(r.measure.atoms().front().point == point1(0.5));
  CHECK(potential(k, r.measure, point1(0.5)) == kInfinity);
  CHECK(all_pass(r.checks));
}

TEST_CASE("two points: certified bounds and monotone divergence") {
  const auto k = KernelSpec::metric_power(0.5);
  double previous = -1.0;
  for (int M = 1; M <= 6; ++M) {
    EvansOptions opts;
    opts.depth = M;
    const auto r = evans_measure(k, two_points(), opts);
    CHECK(all_pass(r.checks));
    CHECK(r.measure.mass() <= 1.0);
    CHECK(r.pieces.size() == static_cast<std::size_t>(M));
    for (const auto& p : r.pieces) {
      CHECK(p.weight == std::ldexp(1.0, -p.m));
      CHECK(p.probe_min >= p.bound);
    }
    for (const auto& a : r.measure.atoms()) CHECK((a.point == point1(0) || a.point == point1(1)));
    CHECK(r.probe_min > previous);
    previous = r.probe_min;
  }
}

TEST_CASE("cantor pieces diverge with mass at most one") {
  const auto k = KernelSpec::metric_power(0.8);
  const auto P = FSigmaSpec::cantor(6, false);
  const SetSpec carrier(Cantor{6, 0.0, 1.0});
  double previous = -1.0;
  for (int M = 1; M <= 5; ++M) {
    EvansOptions opts;
    opts.depth = M;
    opts.resolution = 0.01;
    const auto r = evans_measure(k, P, opts);
    CHECK(all_pass(r.checks));
    CHECK(r.measure.mass() <= 1.0);
    for (const auto& a : r.measure.atoms()) CHECK(contains(carrier, a.point));
    CHECK(r.probe_min > previous);
    previous = r.probe_min;
  }
}

TEST_CASE("growing cantor pieces stay inside the truncated set") {
  const auto k = KernelSpec::metric_power(0.8);
  EvansOptions opts;
  opts.depth = 4;
  opts.resolution = 0.02;
  const auto r = evans_measure(k, FSigmaSpec::cantor(4, true), opts);
  CHECK(all_pass(r.checks));
  for (const auto& a : r.measure.atoms()) CHECK(contains(SetSpec(Cantor{1, 0.0, 1.0}), a.point));
}

TEST_CASE("potentials are bounded away from the support") {
  const auto k = KernelSpec::metric_power(0.5);
  EvansOptions opts;
  opts.depth = 4;
  const auto r = evans_measure(k, two_points(), opts);
  for (double x : {-2.0, -0.5, 0.4, 1.7, 3.0}) {
    const double delta = distance_to_support(r.measure, point1(x));
    CHECK(potential(k, r.measure, point1(x)) <= r.measure.mass() * k.profile(delta) * (1 + 1e-12));
  }
}

TEST_CASE("countable carrier on the unit segment") {
  const auto k = KernelSpec::metric_power(0.5);
  const SetSpec unit(Segment{point1(0), point1(1)});
  const auto P0 = grid_points(point1(0), point1(1), std::ldexp(1.0, -10));
  EvansOptions opts;
  opts.depth = 4;
  opts.resolution = std::ldexp(1.0, -8);
  const auto r = evans_on_countable(k, FSigmaSpec::from_pieces({unit}), P0, opts);
  CHECK(all_pass(r.checks));
  CHECK(r.measure.mass() <= 1.0);
  for (const auto& a : r.measure.atoms()) {
    const double scaled = a.point[0] * 1024.0;
    CHECK(scaled == std::round(scaled));
  }
  for (const auto& x : grid_points(point1(0), point1(1), 1.0 / 256)) CHECK(truncated_potential(k, r.measure, x) > 1.0);
}

TEST_CASE("countable carrier already holding the atoms matches the closed construction") {
  const auto k = KernelSpec::metric_power(0.5);
  const std::vector<Point> P0{point1(0), point1(1)};
  EvansOptions opts;
  opts.depth = 3;
  const auto r = evans_on_countable(k, two_points(), P0, opts);
  CHECK(all_pass(r.checks));
  for (const auto& a : r.measure.atoms()) CHECK((a.point == point1(0) || a.point == point1(1)));
}

TEST_CASE("evans rejects bad options") {
  const auto k = KernelSpec::metric_power(0.5);
  EvansOptions opts;
  opts.depth = 0;
  CHECK_THROWS_AS(evans_measure(k, two_points(), opts), InputError);
  opts.depth = 40;
  CHECK_THROWS_AS(evans_measure(k, two_points(), opts), BudgetError);
}
